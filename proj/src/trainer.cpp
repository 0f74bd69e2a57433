#include "hmimvc/trainer.hpp"

#include <chrono>
#include <cmath>

namespace hmimvc {

std::vector<IndexVec> shuffle_batches(const IndexVec& indices, index_t batch_size,
                                      std::uint64_t epoch_seed) {
    if (indices.empty()) return {};
    if (batch_size < 2) throw ConfigError("batch size must be >= 2");
    IndexVec order = indices;
    Rng rng(epoch_seed);
    rng.shuffle(order);
    std::vector<IndexVec> batches;
    for (index_t start = 0; start < order.size(); start += batch_size) {
        const index_t end = std::min(start + batch_size, order.size());
        batches.emplace_back(order.begin() + start, order.begin() + end);
    }
    if (batches.size() > 1 && batches.back().size() < 2) {
        batches[batches.size() - 2].push_back(batches.back()[0]);
        batches.pop_back();
    }
    return batches;
}

namespace {

Temperature compute_initial_temperature(const ModelParams& params, const MultiViewDataset& ds,
                                        const PartitionMasks& masks, const TrainConfig& config) {
    const Matrix x1 = gather_rows(ds.views[0], masks.complete_idx);
    const Matrix x2 = gather_rows(ds.views[1], masks.complete_idx);
    const Matrix z1 = encode(params, 0, x1);
    const Matrix z2 = encode(params, 1, x2);
    const PairBatch pairs =
        sample_pairs(masks, masks.complete_idx, derive_seed(config.seed, seed_tag::tau_pairs),
                     config.negatives_per_positive);
    const RowMap rows(masks.complete_idx, ds.n());
    return compute_tau(z1, z2, pairs, rows);
}

}  // namespace

TrainResult train(const MultiViewDataset& ds, const PartitionMasks& masks,
                  const TrainConfig& config, const TrainHooks& hooks, const Checkpoint* resume) {
    if (ds.n_views() != 2) throw ConfigError("training expects exactly two views");
    if (masks.complete_idx.size() < 2)
        throw ConfigError("training needs a complete set of >= 2 instances, got " +
                          std::to_string(masks.complete_idx.size()));
    const index_t batch_size = std::min(config.batch_size, masks.complete_idx.size());
    if (batch_size < 2) throw ConfigError("batch size must be >= 2");

    TrainResult result;
    int start_stage = 0;
    index_t start_epoch = 0;
    if (resume != nullptr) {
        result.params = resume->params;
        result.tau = resume->tau;
        if (resume->adam) result.adam = *resume->adam;
        if (resume->progress) {
            start_stage = resume->progress->stage;
            start_epoch = resume->progress->epoch_in_stage;
        }
        if (result.params.view_dims != ds.view_dims())
            throw ConfigError("resume checkpoint does not match the dataset's view dims");
    } else {
        result.params = init_params(ds.view_dims(), config.d_z, config.hidden, config.seed);
    }

    index_t total_epochs = 0;  // epochs that will actually run, for the final-eval hook
    for (int stage = 0; stage < 3; ++stage)
        if (config.effective_mask(stage).any())
            total_epochs += config.stage_epochs[static_cast<index_t>(stage)];
    index_t global_epoch = 0;

    for (int stage = 0; stage < 3; ++stage) {
        const index_t stage_len = config.stage_epochs[static_cast<index_t>(stage)];
        const LossMask mask = config.effective_mask(stage);
        index_t first_epoch = 0;
        if (stage < start_stage) {
            first_epoch = stage_len;  // already completed in the resumed run
        } else if (stage == start_stage) {
            first_epoch = std::min(start_epoch, stage_len);
        }
        if (mask.any()) global_epoch += first_epoch;  // global_epoch counts trained epochs only

        // Fresh optimizer per stage; a mid-stage resume keeps the restored
        // moments, and stages before the resume point must not touch them.
        const bool resumed_mid_stage =
            stage == start_stage && start_epoch > 0 && start_epoch < stage_len;
        if (stage >= start_stage && !resumed_mid_stage) result.adam = AdamState{};
        result.adam.lr = config.lr;

        const Temperature* tau_ptr = result.tau ? &*result.tau : nullptr;
        if (mask.cl && stage >= 1 && tau_ptr == nullptr)
            throw NumericError("contrastive stage reached without a temperature");

        for (index_t epoch = first_epoch; epoch < stage_len && mask.any(); ++epoch) {
            const auto t0 = std::chrono::steady_clock::now();
            const auto batches = shuffle_batches(
                masks.complete_idx, batch_size,
                derive_seed(config.seed, seed_tag::epoch_shuffle, static_cast<index_t>(stage),
                            epoch));
            LossBreakdown mean;
            for (index_t bi = 0; bi < batches.size(); ++bi) {
                const IndexVec& rows_idx = batches[bi];
                const Matrix x1 = gather_rows(ds.views[0], rows_idx);
                const Matrix x2 = gather_rows(ds.views[1], rows_idx);
                const PairBatch pairs = sample_pairs(
                    masks, rows_idx,
                    derive_seed(config.seed, seed_tag::pair_sampling,
                                static_cast<index_t>(stage) * 1000000 + epoch, bi),
                    config.negatives_per_positive);
                const RowMap rows(rows_idx, ds.n());
                BatchLoss batch = compute_batch(result.params, x1, x2, pairs, rows, mask, tau_ptr,
                                                config.neg_exponents);
                if (!std::isfinite(batch.losses.total) ||
                    batch.losses.total > config.explosion_threshold)
                    throw NumericError("loss exploded at stage " + std::to_string(stage) +
                                       ", epoch " + std::to_string(epoch) + ", batch " +
                                       std::to_string(bi) + ": total = " +
                                       std::to_string(batch.losses.total));
                apply_adam(result.params, batch.grads, result.adam);
                mean.l_cl += batch.losses.l_cl;
                mean.l_pre += batch.losses.l_pre;
                mean.l_rec += batch.losses.l_rec;
                mean.total += batch.losses.total;
            }
            const double nb = static_cast<double>(batches.size());
            mean.l_cl /= nb;
            mean.l_pre /= nb;
            mean.l_rec /= nb;
            mean.total /= nb;

            EpochRecord record;
            record.stage = stage;
            record.epoch_in_stage = epoch;
            record.global_epoch = global_epoch;
            record.losses = mean;
            record.wall_ms = std::chrono::duration<double, std::milli>(
                                 std::chrono::steady_clock::now() - t0)
                                 .count();
            ++global_epoch;

            if (config.eval_every > 0 && hooks.evaluate) {
                const bool due = (global_epoch % config.eval_every) == 0;
                const bool last = global_epoch == total_epochs;
                if (due || last) record.eval = hooks.evaluate(result.params);
            }
            if (hooks.on_epoch) hooks.on_epoch(record);
            result.log.epochs.push_back(std::move(record));
        }
        // The temperature is fixed once, at the end of the warm-up stage,
        // from an eval-mode pass over the complete set.
        if (stage == 0 && config.ablation.cl && !result.tau)
            result.tau = compute_initial_temperature(result.params, ds, masks, config);

        result.progress = TrainProgress{stage + 1, 0};
        if (hooks.on_stage_end && stage >= start_stage) {
            Checkpoint snapshot;
            snapshot.params = result.params;
            snapshot.adam = result.adam;
            snapshot.tau = result.tau;
            snapshot.progress = TrainProgress{stage + 1, 0};
            hooks.on_stage_end(snapshot, stage);
        }
    }
    result.progress = TrainProgress{3, 0};
    return result;
}

}  // namespace hmimvc
