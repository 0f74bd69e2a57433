#pragma once

#include <array>
#include <functional>
#include <optional>

#include "hmimvc/checkpoint.hpp"

namespace hmimvc {

/// Staged schedule. Stage 0 warms up the autoencoders, stage 1 adds the
/// contrastive term (the temperature is fixed at the stage-0/1 boundary),
/// stage 2 trains the full objective. The per-stage masks are
/// configurable; `ablation` intersects all of them, so a run can drop
/// components entirely.
struct TrainConfig {
    index_t batch_size = 1024;
    double lr = 1e-4;
    std::array<index_t, 3> stage_epochs{150, 150, 150};
    std::uint64_t seed = 0;
    std::array<LossMask, 3> stage_masks{LossMask{true, false, false},
                                        LossMask{true, true, false},
                                        LossMask{true, true, true}};
    LossMask ablation{true, true, true};
    std::vector<index_t> hidden{256, 256, 256};
    index_t d_z = 10;
    NegExponents neg_exponents{};
    index_t negatives_per_positive = 1;
    double explosion_threshold = 1e6;
    index_t eval_every = 0;  // 0 disables in-training evaluation

    LossMask effective_mask(int stage) const {
        const LossMask& s = stage_masks[static_cast<index_t>(stage)];
        return LossMask{s.rec && ablation.rec, s.cl && ablation.cl, s.pre && ablation.pre};
    }
};

struct EvalPoint {
    double nmi = 0.0, acc = 0.0, ari = 0.0;
};

struct EpochRecord {
    int stage = 0;
    index_t epoch_in_stage = 0;  // 0-based
    index_t global_epoch = 0;
    LossBreakdown losses;  // mean over the epoch's batches
    double wall_ms = 0.0;
    std::optional<EvalPoint> eval;
};

struct TrainLog {
    std::vector<EpochRecord> epochs;
};

struct TrainHooks {
    /// Full inference + clustering on a read-only parameter snapshot.
    std::function<EvalPoint(const ModelParams&)> evaluate;
    /// Called once per completed epoch (streaming log sink).
    std::function<void(const EpochRecord&)> on_epoch;
    /// Called at every stage boundary with a resumable checkpoint.
    std::function<void(const Checkpoint&, int stage)> on_stage_end;
};

struct TrainResult {
    ModelParams params;
    TrainLog log;
    std::optional<Temperature> tau;
    AdamState adam;
    TrainProgress progress;
};

/// Seeded permutation of the index set chopped into batches; a trailing
/// batch of one is merged into its predecessor.
std::vector<IndexVec> shuffle_batches(const IndexVec& indices, index_t batch_size,
                                      std::uint64_t epoch_seed);

/// Trains on the complete aligned subset only. Deterministic per
/// (config, seed); resuming from a checkpoint replays the identical
/// trajectory.
TrainResult train(const MultiViewDataset& ds, const PartitionMasks& masks,
                  const TrainConfig& config, const TrainHooks& hooks = {},
                  const Checkpoint* resume = nullptr);

}  // namespace hmimvc
