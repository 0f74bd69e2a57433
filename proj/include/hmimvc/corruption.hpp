#pragma once

#include <filesystem>

#include "hmimvc/dataset.hpp"
#include "hmimvc/rng.hpp"

namespace hmimvc {

/// Partition of [0, N) into the complete set X, the view-unaligned set S,
/// and the view-missing set W, plus the concrete corruption applied to S
/// and W. The corruption is virtual: the clean dataset is kept and the
/// masks say how to present it.
struct PartitionMasks {
    index_t n = 0;
    double alpha = 0.0, beta = 0.0;
    std::uint64_t seed = 0;

    IndexVec complete_idx;   // X
    IndexVec unaligned_idx;  // S, ascending
    IndexVec missing_idx;    // W, ascending

    /// shuffle_perm[t] = dataset index whose view-2 row is observed at
    /// position unaligned_idx[t]. A derangement: shuffle_perm[t] !=
    /// unaligned_idx[t] for all t whenever |S| >= 2.
    IndexVec shuffle_perm;

    /// missing_view[t] in {1,2}: which view of missing_idx[t] is absent.
    std::vector<int> missing_view;

    double gamma() const { return 1.0 - alpha - beta; }
    void validate() const;  // throws ConfigError on any invariant violation
};

/// Fixed-point-free permutation of [0, n) by rejection sampling over
/// Fisher-Yates shuffles. n must not be 1.
IndexVec random_derangement(index_t n, Rng& rng);

/// Draws the X/S/W split: |W| = round(alpha·N), |S| = round(beta·N),
/// the remainder is X. View-2 rows of S are deranged; each W instance
/// loses one uniformly chosen view.
PartitionMasks simulate_corruption(const MultiViewDataset& ds, double alpha, double beta,
                                   std::uint64_t seed);

/// View-2 rows as the pipeline observes them: positions in S carry the
/// deranged rows; everything else is untouched.
Matrix observed_view2(const MultiViewDataset& ds, const PartitionMasks& masks);

void save_masks(const PartitionMasks& masks, const std::filesystem::path& path);
PartitionMasks load_masks(const std::filesystem::path& path);

/// Cross-view sample pairs with labels: 1 for positive (i,i), 0 for
/// negative (i,j), j != i. Indices are dataset indices drawn from the
/// complete set.
struct PairBatch {
    IndexVec anchor_idx;   // instance supplying the view-1 latent
    IndexVec partner_idx;  // instance supplying the view-2 latent
    std::vector<int> y;

    index_t size() const { return y.size(); }
    index_t n_positive() const;
    index_t n_negative() const;
};

/// One positive pair (i,i) per batch index plus `negatives_per_positive`
/// negatives (i,j) with j != i drawn uniformly from the batch.
/// batch_indices must be a subset of masks.complete_idx of size >= 2.
PairBatch sample_pairs(const PartitionMasks& masks, std::span<const index_t> batch_indices,
                       std::uint64_t seed, index_t negatives_per_positive = 1);

}  // namespace hmimvc
