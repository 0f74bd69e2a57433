#pragma once

#include "hmimvc/evaluation.hpp"
#include "hmimvc/inference.hpp"
#include "hmimvc/trainer.hpp"

namespace hmimvc {

enum class Imputer { dual, mean };

struct EvaluateOptions {
    RealignMethod realign_method = RealignMethod::hungarian;
    Imputer imputer = Imputer::dual;
    index_t kmeans_restarts = 10;
};

/// Clustering metrics plus recovery diagnostics. The diagnostics compare
/// against ground truth the model never saw (true partners of the
/// unaligned set, true latents of the missing views), which the benchmark
/// datasets carry by construction.
struct EvaluationOutput {
    ClusterReport report;
    RecoveredLatents recovered;

    // Unaligned-set recovery; NaN when the unaligned set is empty.
    double realign_class_accuracy = 0.0;
    double realign_instance_accuracy = 0.0;

    // Missing-set recovery; NaN when the missing set is empty.
    double impute_mse_dual = 0.0;
    double impute_mse_mean = 0.0;
};

/// Full inference path: impute the missing set, re-align the unaligned
/// set, assemble the latent space, cluster it, and score against labels.
EvaluationOutput run_inference_evaluation(const ModelParams& params, const MultiViewDataset& ds,
                                          const PartitionMasks& masks,
                                          const EvaluateOptions& opts, std::uint64_t seed);

/// In-training evaluation hook running the full inference path on a
/// read-only parameter snapshot. The dataset and masks must outlive the
/// returned callable.
std::function<EvalPoint(const ModelParams&)> make_train_evaluator(const MultiViewDataset& ds,
                                                                  const PartitionMasks& masks,
                                                                  const EvaluateOptions& opts,
                                                                  std::uint64_t seed);

}  // namespace hmimvc
