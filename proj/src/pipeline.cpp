#include "hmimvc/pipeline.hpp"

#include <cmath>
#include <limits>

namespace hmimvc {

namespace {

// True latent of each absent view, encoded from the ground-truth rows the
// pipeline itself never reads.
Matrix oracle_missing_latents(const ModelParams& params, const MultiViewDataset& ds,
                              const PartitionMasks& masks) {
    const index_t n_w = masks.missing_idx.size();
    Matrix z_true(n_w, params.d_z);
    for (index_t absent = 0; absent < 2; ++absent) {
        IndexVec slots, rows;
        for (index_t t = 0; t < n_w; ++t)
            if (static_cast<index_t>(masks.missing_view[t]) == absent + 1) {
                slots.push_back(t);
                rows.push_back(masks.missing_idx[t]);
            }
        if (rows.empty()) continue;
        const Matrix z = encode(params, absent, gather_rows(ds.views[absent], rows));
        for (index_t i = 0; i < slots.size(); ++i)
            std::copy_n(z.data() + i * params.d_z, params.d_z,
                        z_true.data() + slots[i] * params.d_z);
    }
    return z_true;
}

double mean_row_mse(const Matrix& a, const Matrix& b) {
    double sum = 0.0;
    for (index_t i = 0; i < a.rows(); ++i) sum += squared_distance(a.row(i), b.row(i));
    return sum / static_cast<double>(a.rows());
}

}  // namespace

EvaluationOutput run_inference_evaluation(const ModelParams& params, const MultiViewDataset& ds,
                                          const PartitionMasks& masks,
                                          const EvaluateOptions& opts, std::uint64_t seed) {
    EvaluationOutput out;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    ImputationResult imputed = impute_missing(params, ds, masks);
    const MeanFillBaseline baseline = impute_mean_baseline(params, ds, masks);
    if (!masks.missing_idx.empty()) {
        const Matrix z_true = oracle_missing_latents(params, ds, masks);
        out.impute_mse_dual = mean_row_mse(imputed.imputed_latent, z_true);
        out.impute_mse_mean = mean_row_mse(baseline.imputed_latent, z_true);
    } else {
        out.impute_mse_dual = nan;
        out.impute_mse_mean = nan;
    }

    const IndexVec realignment = realign(params, ds, masks, opts.realign_method);
    if (!masks.unaligned_idx.empty()) {
        // source_of[p]: the instance whose view-2 row is observed at position p.
        std::vector<index_t> source_of(ds.n(), 0);
        std::vector<index_t> true_pos(ds.n(), 0);
        for (index_t t = 0; t < masks.unaligned_idx.size(); ++t) {
            source_of[masks.unaligned_idx[t]] = masks.shuffle_perm[t];
            true_pos[masks.shuffle_perm[t]] = masks.unaligned_idx[t];
        }
        double class_hits = 0.0, instance_hits = 0.0;
        for (index_t t = 0; t < masks.unaligned_idx.size(); ++t) {
            const index_t instance = masks.unaligned_idx[t];
            const index_t partner = source_of[realignment[t]];
            if (ds.labels[partner] == ds.labels[instance]) class_hits += 1.0;
            if (realignment[t] == true_pos[instance]) instance_hits += 1.0;
        }
        out.realign_class_accuracy = class_hits / static_cast<double>(masks.unaligned_idx.size());
        out.realign_instance_accuracy =
            instance_hits / static_cast<double>(masks.unaligned_idx.size());
    } else {
        out.realign_class_accuracy = nan;
        out.realign_instance_accuracy = nan;
    }

    if (opts.imputer == Imputer::mean) {
        imputed.imputed_latent = baseline.imputed_latent;
    }
    out.recovered = assemble(params, ds, masks, realignment, imputed);
    out.report = cluster_and_score(out.recovered.concat(), ds.labels,
                                   static_cast<index_t>(ds.n_classes), seed,
                                   opts.kmeans_restarts);
    return out;
}

std::function<EvalPoint(const ModelParams&)> make_train_evaluator(const MultiViewDataset& ds,
                                                                  const PartitionMasks& masks,
                                                                  const EvaluateOptions& opts,
                                                                  std::uint64_t seed) {
    return [&ds, &masks, opts, seed](const ModelParams& params) {
        const EvaluationOutput out = run_inference_evaluation(params, ds, masks, opts, seed);
        return EvalPoint{out.report.nmi, out.report.acc, out.report.ari};
    };
}

}  // namespace hmimvc
