#pragma once

#include "hmimvc/matrix.hpp"
#include "hmimvc/rng.hpp"

namespace hmimvc {

/// Minimum-cost perfect matching on a square cost matrix (Kuhn-Munkres
/// with potentials, O(n³)). Returns col = assignment[row]. Ties resolve
/// to the lowest index, so the result is deterministic.
IndexVec hungarian(const Matrix& cost);

struct KmeansResult {
    std::vector<int> assignments;
    double inertia = 0.0;
    Matrix centroids;
};

/// Lloyd iterations from k-means++ seeds until the relative inertia
/// change drops below 1e-6 (or 300 iterations); best of `restarts` by
/// inertia. Empty clusters are re-seeded from the farthest point.
KmeansResult kmeans(const Matrix& x, index_t k, std::uint64_t seed, index_t restarts = 10);

enum class NmiNorm { mean, sqrt };

/// Normalized mutual information. The default normalization is the mean
/// of entropies, 2·I/(H(A)+H(B)); NmiNorm::sqrt gives I/√(H(A)·H(B)).
/// Two single-cluster partitions score 1; one single-cluster partition
/// against a split one scores 0.
double nmi(const std::vector<int>& labels_a, const std::vector<int>& labels_b,
           NmiNorm norm = NmiNorm::mean);

/// Clustering accuracy: the matched fraction under the best
/// cluster-to-label mapping (Hungarian on the negated contingency table).
double acc(const std::vector<int>& true_labels, const std::vector<int>& assignments);

/// Adjusted Rand index from pair counts.
double ari(const std::vector<int>& labels_a, const std::vector<int>& labels_b);

struct ClusterReport {
    std::vector<int> assignments;
    double nmi = 0.0, acc = 0.0, ari = 0.0;
    index_t k = 0;
    std::uint64_t seed = 0;
    double inertia = 0.0;
};

ClusterReport cluster_and_score(const Matrix& features, const std::vector<int>& labels, index_t k,
                                std::uint64_t seed, index_t restarts = 10);

}  // namespace hmimvc
