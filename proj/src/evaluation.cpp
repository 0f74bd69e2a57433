#include "hmimvc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace hmimvc {

IndexVec hungarian(const Matrix& cost) {
    const index_t n = cost.rows();
    if (cost.rows() != cost.cols())
        throw std::invalid_argument("hungarian: cost matrix must be square");
    if (!cost.is_finite())
        throw std::invalid_argument("hungarian: cost matrix has non-finite entries");
    if (n == 0) return {};

    constexpr double kInf = std::numeric_limits<double>::infinity();
    // 1-based arrays; p[j] is the row matched to column j, column 0 is virtual.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1, 0.0);
    std::vector<index_t> p(n + 1, 0), way(n + 1, 0);
    for (index_t i = 1; i <= n; ++i) {
        p[0] = i;
        index_t j0 = 0;
        std::fill(minv.begin(), minv.end(), kInf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const index_t i0 = p[j0];
            double delta = kInf;
            index_t j1 = 0;
            for (index_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (index_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const index_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    IndexVec assignment(n);
    for (index_t j = 1; j <= n; ++j) assignment[p[j] - 1] = j - 1;
    return assignment;
}

namespace {

double point_cost(const Matrix& x, index_t i, const Matrix& centroids, index_t c) {
    return squared_distance(x.row(i), centroids.row(c));
}

KmeansResult kmeans_once(const Matrix& x, index_t k, std::uint64_t seed) {
    const index_t n = x.rows();
    Rng rng(seed);

    // k-means++ seeding.
    Matrix centroids(k, x.cols());
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    index_t first = rng.uniform_index(n);
    std::copy_n(x.data() + first * x.cols(), x.cols(), centroids.data());
    for (index_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (index_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], point_cost(x, i, centroids, c - 1));
            total += d2[i];
        }
        index_t pick = 0;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            pick = n - 1;
            for (index_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.uniform_index(n);
        }
        std::copy_n(x.data() + pick * x.cols(), x.cols(), centroids.data() + c * x.cols());
    }

    std::vector<int> assign(n, 0);
    double prev_inertia = std::numeric_limits<double>::infinity();
    double inertia = 0.0;
    for (int iter = 0; iter < 300; ++iter) {
        // Assign.
        inertia = 0.0;
        for (index_t i = 0; i < n; ++i) {
            double best = point_cost(x, i, centroids, 0);
            index_t best_c = 0;
            for (index_t c = 1; c < k; ++c) {
                const double d = point_cost(x, i, centroids, c);
                if (d < best) {
                    best = d;
                    best_c = c;
                }
            }
            assign[i] = static_cast<int>(best_c);
            inertia += best;
        }
        if (inertia > prev_inertia * (1.0 + 1e-9) + 1e-12)
            throw NumericError("kmeans: inertia increased across an iteration");
        const bool converged =
            prev_inertia - inertia <= 1e-6 * std::max(prev_inertia, 1e-300) &&
            std::isfinite(prev_inertia);
        prev_inertia = inertia;
        if (converged) break;

        // Update.
        Matrix sums(k, x.cols());
        std::vector<index_t> counts(k, 0);
        for (index_t i = 0; i < n; ++i) {
            const index_t c = static_cast<index_t>(assign[i]);
            ++counts[c];
            for (index_t j = 0; j < x.cols(); ++j) sums(c, j) += x(i, j);
        }
        for (index_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // Re-seed from the point farthest from its centroid.
                double far_d = -1.0;
                index_t far_i = 0;
                for (index_t i = 0; i < n; ++i) {
                    const double d = point_cost(x, i, centroids, assign[i]);
                    if (d > far_d) {
                        far_d = d;
                        far_i = i;
                    }
                }
                std::copy_n(x.data() + far_i * x.cols(), x.cols(),
                            centroids.data() + c * x.cols());
            } else {
                for (index_t j = 0; j < x.cols(); ++j)
                    centroids(c, j) = sums(c, j) / static_cast<double>(counts[c]);
            }
        }
    }
    KmeansResult res;
    res.assignments = std::move(assign);
    res.inertia = inertia;
    res.centroids = std::move(centroids);
    return res;
}

/// Contingency table over compacted label ids.
struct Contingency {
    std::vector<std::vector<double>> counts;  // a-class × b-class
    std::vector<double> a_sums, b_sums;
    double n = 0.0;
};

Contingency contingency_table(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("metrics: label vectors differ in length");
    if (a.empty()) throw std::invalid_argument("metrics: empty label vectors");
    std::map<int, index_t> a_ids, b_ids;
    for (int v : a) a_ids.emplace(v, a_ids.size());
    for (int v : b) b_ids.emplace(v, b_ids.size());
    Contingency t;
    t.counts.assign(a_ids.size(), std::vector<double>(b_ids.size(), 0.0));
    t.a_sums.assign(a_ids.size(), 0.0);
    t.b_sums.assign(b_ids.size(), 0.0);
    t.n = static_cast<double>(a.size());
    for (index_t i = 0; i < a.size(); ++i) {
        const index_t ai = a_ids[a[i]], bi = b_ids[b[i]];
        t.counts[ai][bi] += 1.0;
        t.a_sums[ai] += 1.0;
        t.b_sums[bi] += 1.0;
    }
    return t;
}

}  // namespace

KmeansResult kmeans(const Matrix& x, index_t k, std::uint64_t seed, index_t restarts) {
    if (k == 0) throw ConfigError("kmeans: k must be >= 1");
    if (k > x.rows())
        throw ConfigError("kmeans: k = " + std::to_string(k) + " exceeds the " +
                          std::to_string(x.rows()) + " data points");
    if (restarts == 0) restarts = 1;
    KmeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (index_t r = 0; r < restarts; ++r) {
        KmeansResult res = kmeans_once(x, k, derive_seed(seed, seed_tag::kmeans, r));
        if (res.inertia < best.inertia) best = std::move(res);
    }
    return best;
}

double nmi(const std::vector<int>& labels_a, const std::vector<int>& labels_b, NmiNorm norm) {
    const Contingency t = contingency_table(labels_a, labels_b);
    double h_a = 0.0, h_b = 0.0, mi = 0.0;
    for (double s : t.a_sums)
        if (s > 0.0) h_a -= (s / t.n) * std::log(s / t.n);
    for (double s : t.b_sums)
        if (s > 0.0) h_b -= (s / t.n) * std::log(s / t.n);
    for (index_t i = 0; i < t.counts.size(); ++i)
        for (index_t j = 0; j < t.counts[i].size(); ++j) {
            const double c = t.counts[i][j];
            if (c > 0.0) mi += (c / t.n) * std::log(t.n * c / (t.a_sums[i] * t.b_sums[j]));
        }
    if (norm == NmiNorm::mean) {
        if (h_a + h_b <= 0.0) return 1.0;  // both partitions are single clusters
        return 2.0 * mi / (h_a + h_b);
    }
    if (h_a <= 0.0 || h_b <= 0.0) return (h_a <= 0.0 && h_b <= 0.0) ? 1.0 : 0.0;
    return mi / std::sqrt(h_a * h_b);
}

double acc(const std::vector<int>& true_labels, const std::vector<int>& assignments) {
    const Contingency t = contingency_table(assignments, true_labels);
    const index_t dim = std::max(t.counts.size(), t.counts.empty() ? 0 : t.counts[0].size());
    Matrix neg(dim, dim, 0.0);
    for (index_t i = 0; i < t.counts.size(); ++i)
        for (index_t j = 0; j < t.counts[i].size(); ++j) neg(i, j) = -t.counts[i][j];
    const IndexVec mapping = hungarian(neg);
    double matched = 0.0;
    for (index_t i = 0; i < t.counts.size(); ++i)
        if (mapping[i] < t.counts[i].size()) matched += t.counts[i][mapping[i]];
    return matched / t.n;
}

double ari(const std::vector<int>& labels_a, const std::vector<int>& labels_b) {
    if (labels_a.size() < 2) throw std::invalid_argument("ari: needs at least two samples");
    const Contingency t = contingency_table(labels_a, labels_b);
    const auto choose2 = [](double m) { return m * (m - 1.0) / 2.0; };
    double index = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (const auto& row : t.counts)
        for (double c : row) index += choose2(c);
    for (double s : t.a_sums) sum_a += choose2(s);
    for (double s : t.b_sums) sum_b += choose2(s);
    const double expected = sum_a * sum_b / choose2(t.n);
    const double max_index = 0.5 * (sum_a + sum_b);
    if (max_index == expected) return 1.0;  // both partitions trivially identical in structure
    return (index - expected) / (max_index - expected);
}

ClusterReport cluster_and_score(const Matrix& features, const std::vector<int>& labels, index_t k,
                                std::uint64_t seed, index_t restarts) {
    if (features.rows() != labels.size())
        throw std::invalid_argument("cluster_and_score: feature/label row mismatch");
    KmeansResult km = kmeans(features, k, seed, restarts);
    ClusterReport report;
    report.nmi = nmi(labels, km.assignments);
    report.acc = acc(labels, km.assignments);
    report.ari = ari(labels, km.assignments);
    report.assignments = std::move(km.assignments);
    report.k = k;
    report.seed = seed;
    report.inertia = km.inertia;
    return report;
}

}  // namespace hmimvc
