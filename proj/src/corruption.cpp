#include "hmimvc/corruption.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace hmimvc {

void PartitionMasks::validate() const {
    if (complete_idx.size() + unaligned_idx.size() + missing_idx.size() != n)
        throw ConfigError("masks: subset sizes do not sum to N");
    std::vector<int> seen(n, 0);
    for (const auto* set : {&complete_idx, &unaligned_idx, &missing_idx})
        for (index_t i : *set) {
            if (i >= n) throw ConfigError("masks: index out of range");
            if (seen[i]++) throw ConfigError("masks: subsets overlap at index " + std::to_string(i));
        }
    if (shuffle_perm.size() != unaligned_idx.size())
        throw ConfigError("masks: shuffle permutation length mismatch");
    if (unaligned_idx.size() >= 2) {
        std::unordered_set<index_t> targets(shuffle_perm.begin(), shuffle_perm.end());
        if (targets.size() != shuffle_perm.size())
            throw ConfigError("masks: shuffle permutation is not a bijection");
        for (index_t t = 0; t < shuffle_perm.size(); ++t) {
            if (!std::binary_search(unaligned_idx.begin(), unaligned_idx.end(), shuffle_perm[t]))
                throw ConfigError("masks: shuffle target outside the unaligned set");
            if (shuffle_perm[t] == unaligned_idx[t])
                throw ConfigError("masks: shuffle permutation has a fixed point at " +
                                  std::to_string(unaligned_idx[t]));
        }
    }
    if (missing_view.size() != missing_idx.size())
        throw ConfigError("masks: missing-view tags length mismatch");
    for (int v : missing_view)
        if (v != 1 && v != 2) throw ConfigError("masks: missing view must be 1 or 2");
}

IndexVec random_derangement(index_t n, Rng& rng) {
    if (n == 1) throw ConfigError("cannot derange a single element");
    IndexVec perm(n);
    for (index_t i = 0; i < n; ++i) perm[i] = i;
    if (n == 0) return perm;
    while (true) {
        rng.shuffle(perm);
        bool fixed_point = false;
        for (index_t i = 0; i < n; ++i)
            if (perm[i] == i) {
                fixed_point = true;
                break;
            }
        if (!fixed_point) return perm;
    }
}

PartitionMasks simulate_corruption(const MultiViewDataset& ds, double alpha, double beta,
                                   std::uint64_t seed) {
    if (alpha < 0.0 || beta < 0.0) throw ConfigError("corruption ratios must be >= 0");
    if (alpha + beta > 1.0)
        throw ConfigError("alpha + beta = " + std::to_string(alpha + beta) + " exceeds 1");
    const index_t n = ds.n();
    const index_t n_w = static_cast<index_t>(std::llround(alpha * static_cast<double>(n)));
    const index_t n_s = static_cast<index_t>(std::llround(beta * static_cast<double>(n)));
    if (n_w + n_s > n) throw ConfigError("corruption ratios leave no complete data");
    if (n_s == 1)
        throw ConfigError("beta yields a single unaligned instance, which cannot be deranged; "
                          "widen beta or set it to 0");

    PartitionMasks masks;
    masks.n = n;
    masks.alpha = alpha;
    masks.beta = beta;
    masks.seed = seed;

    Rng rng(derive_seed(seed, seed_tag::corruption));
    IndexVec order(n);
    for (index_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);

    masks.missing_idx.assign(order.begin(), order.begin() + n_w);
    masks.unaligned_idx.assign(order.begin() + n_w, order.begin() + n_w + n_s);
    masks.complete_idx.assign(order.begin() + n_w + n_s, order.end());
    std::sort(masks.missing_idx.begin(), masks.missing_idx.end());
    std::sort(masks.unaligned_idx.begin(), masks.unaligned_idx.end());
    std::sort(masks.complete_idx.begin(), masks.complete_idx.end());

    const IndexVec der = random_derangement(n_s, rng);
    masks.shuffle_perm.resize(n_s);
    for (index_t t = 0; t < n_s; ++t) masks.shuffle_perm[t] = masks.unaligned_idx[der[t]];

    masks.missing_view.resize(n_w);
    for (index_t t = 0; t < n_w; ++t)
        masks.missing_view[t] = rng.uniform_index(2) == 0 ? 1 : 2;

    masks.validate();
    return masks;
}

Matrix observed_view2(const MultiViewDataset& ds, const PartitionMasks& masks) {
    if (ds.n_views() < 2) throw ConfigError("observed_view2 needs a bi-view dataset");
    Matrix x2 = ds.views[1];
    for (index_t t = 0; t < masks.unaligned_idx.size(); ++t) {
        const index_t pos = masks.unaligned_idx[t];
        const index_t src = masks.shuffle_perm[t];
        std::copy_n(ds.views[1].data() + src * x2.cols(), x2.cols(), x2.data() + pos * x2.cols());
    }
    return x2;
}

void save_masks(const PartitionMasks& masks, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write masks file: " + path.string());
    out << "# hmimvc partition masks\n";
    out << "n = " << masks.n << '\n';
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", masks.alpha);
    out << "alpha = " << buf << '\n';
    std::snprintf(buf, sizeof(buf), "%.17g", masks.beta);
    out << "beta = " << buf << '\n';
    out << "seed = " << masks.seed << '\n';
    const auto write_list = [&out](const char* key, const IndexVec& v) {
        out << key << " =";
        for (index_t i : v) out << ' ' << i;
        out << '\n';
    };
    write_list("complete", masks.complete_idx);
    write_list("unaligned", masks.unaligned_idx);
    write_list("missing", masks.missing_idx);
    write_list("shuffle", masks.shuffle_perm);
    out << "missing_view =";
    for (int v : masks.missing_view) out << ' ' << v;
    out << '\n';
}

PartitionMasks load_masks(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open masks file: " + path.string());
    PartitionMasks masks;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("masks file line is not key = value");
        std::string key = line.substr(0, eq);
        key.erase(key.find_last_not_of(" \t") + 1);
        std::istringstream values(line.substr(eq + 1));
        if (key == "n") {
            values >> masks.n;
        } else if (key == "alpha") {
            values >> masks.alpha;
        } else if (key == "beta") {
            values >> masks.beta;
        } else if (key == "seed") {
            values >> masks.seed;
        } else if (key == "missing_view") {
            int v;
            while (values >> v) masks.missing_view.push_back(v);
        } else {
            IndexVec* target = key == "complete"    ? &masks.complete_idx
                               : key == "unaligned" ? &masks.unaligned_idx
                               : key == "missing"   ? &masks.missing_idx
                               : key == "shuffle"   ? &masks.shuffle_perm
                                                    : nullptr;
            if (target == nullptr) throw ConfigError("unknown masks key '" + key + "'");
            index_t i;
            while (values >> i) target->push_back(i);
        }
    }
    masks.validate();
    return masks;
}

index_t PairBatch::n_positive() const {
    index_t n = 0;
    for (int v : y) n += (v == 1);
    return n;
}

index_t PairBatch::n_negative() const { return y.size() - n_positive(); }

PairBatch sample_pairs(const PartitionMasks& masks, std::span<const index_t> batch_indices,
                       std::uint64_t seed, index_t negatives_per_positive) {
    if (batch_indices.size() < 2)
        throw ConfigError("sample_pairs: need a batch of >= 2 to form negative pairs");
    for (index_t i : batch_indices)
        if (!std::binary_search(masks.complete_idx.begin(), masks.complete_idx.end(), i))
            throw ConfigError("sample_pairs: batch index " + std::to_string(i) +
                              " is outside the complete set");
    Rng rng(seed);
    PairBatch pairs;
    const index_t b = batch_indices.size();
    pairs.anchor_idx.reserve(b * (1 + negatives_per_positive));
    for (index_t k = 0; k < b; ++k) {
        pairs.anchor_idx.push_back(batch_indices[k]);
        pairs.partner_idx.push_back(batch_indices[k]);
        pairs.y.push_back(1);
    }
    for (index_t k = 0; k < b; ++k) {
        for (index_t r = 0; r < negatives_per_positive; ++r) {
            index_t j = rng.uniform_index(b - 1);
            if (j >= k) ++j;  // uniform over the batch minus the anchor
            pairs.anchor_idx.push_back(batch_indices[k]);
            pairs.partner_idx.push_back(batch_indices[j]);
            pairs.y.push_back(0);
        }
    }
    return pairs;
}

}  // namespace hmimvc
