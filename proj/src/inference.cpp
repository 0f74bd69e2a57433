#include "hmimvc/inference.hpp"

#include <algorithm>
#include <limits>

#include "hmimvc/evaluation.hpp"

namespace hmimvc {

namespace {

// Splits the missing set by which view is absent and returns, per view v,
// the list of (position-in-missing_idx) whose view v is the present one.
std::array<IndexVec, 2> split_by_present_view(const PartitionMasks& masks) {
    std::array<IndexVec, 2> present;
    for (index_t t = 0; t < masks.missing_idx.size(); ++t) {
        const int absent = masks.missing_view[t];
        present[absent == 1 ? 1 : 0].push_back(t);
    }
    return present;
}

}  // namespace

ImputationResult impute_missing(const ModelParams& params, const MultiViewDataset& ds,
                                const PartitionMasks& masks) {
    ImputationResult result;
    result.rows = masks.missing_idx;
    const index_t n_w = masks.missing_idx.size();
    result.present_latent = Matrix(n_w, params.d_z);
    result.imputed_latent = Matrix(n_w, params.d_z);
    if (n_w == 0) return result;

    const auto present = split_by_present_view(masks);
    for (index_t pv = 0; pv < 2; ++pv) {
        if (present[pv].empty()) continue;
        IndexVec rows;
        for (index_t t : present[pv]) rows.push_back(masks.missing_idx[t]);
        const Matrix x = gather_rows(ds.views[pv], rows);
        const Matrix z = encode(params, pv, x);
        const Matrix z_hat = predict_latent(params, pv, z);
        for (index_t i = 0; i < present[pv].size(); ++i) {
            const index_t t = present[pv][i];
            std::copy_n(z.data() + i * params.d_z, params.d_z,
                        result.present_latent.data() + t * params.d_z);
            std::copy_n(z_hat.data() + i * params.d_z, params.d_z,
                        result.imputed_latent.data() + t * params.d_z);
        }
    }
    return result;
}

MeanFillBaseline impute_mean_baseline(const ModelParams& params, const MultiViewDataset& ds,
                                      const PartitionMasks& masks) {
    MeanFillBaseline result;
    result.rows = masks.missing_idx;
    for (index_t v = 0; v < 2; ++v) {
        Vector mean(ds.views[v].cols(), 0.0);
        for (index_t i : masks.complete_idx)
            for (index_t j = 0; j < mean.size(); ++j) mean[j] += ds.views[v](i, j);
        if (!masks.complete_idx.empty())
            for (double& m : mean) m /= static_cast<double>(masks.complete_idx.size());
        result.view_means.push_back(std::move(mean));
    }
    const index_t n_w = masks.missing_idx.size();
    result.imputed_latent = Matrix(n_w, params.d_z);
    if (n_w == 0) return result;

    // The fill row is identical for every instance missing the same view,
    // so each view's latent is encoded once.
    for (index_t absent = 0; absent < 2; ++absent) {
        Matrix fill(1, result.view_means[absent].size());
        std::copy(result.view_means[absent].begin(), result.view_means[absent].end(), fill.data());
        const Matrix z = encode(params, absent, fill);
        for (index_t t = 0; t < n_w; ++t)
            if (static_cast<index_t>(masks.missing_view[t]) == absent + 1)
                std::copy_n(z.data(), params.d_z, result.imputed_latent.data() + t * params.d_z);
    }
    return result;
}

IndexVec realign(const ModelParams& params, const MultiViewDataset& ds,
                 const PartitionMasks& masks, RealignMethod method) {
    const index_t n_s = masks.unaligned_idx.size();
    if (n_s == 0) return {};
    const Matrix x1 = gather_rows(ds.views[0], masks.unaligned_idx);
    const Matrix x2_obs = gather_rows(observed_view2(ds, masks), masks.unaligned_idx);
    const Matrix z1 = encode(params, 0, x1);
    const Matrix z2 = encode(params, 1, x2_obs);

    Matrix cost(n_s, n_s);
    for (index_t t = 0; t < n_s; ++t)
        for (index_t u = 0; u < n_s; ++u) cost(t, u) = euclidean_distance(z1.row(t), z2.row(u));

    IndexVec assignment;
    if (method == RealignMethod::hungarian) {
        assignment = hungarian(cost);
    } else {
        assignment.assign(n_s, 0);
        std::vector<bool> used(n_s, false);
        for (index_t t = 0; t < n_s; ++t) {
            double best = std::numeric_limits<double>::infinity();
            index_t best_u = 0;
            for (index_t u = 0; u < n_s; ++u) {
                if (used[u]) continue;
                if (cost(t, u) < best) {
                    best = cost(t, u);
                    best_u = u;
                }
            }
            used[best_u] = true;
            assignment[t] = best_u;
        }
    }
    IndexVec map(n_s);
    for (index_t t = 0; t < n_s; ++t) map[t] = masks.unaligned_idx[assignment[t]];
    return map;
}

const char* provenance_name(Provenance p) {
    switch (p) {
        case Provenance::encoded: return "encoded";
        case Provenance::imputed: return "imputed";
        case Provenance::realigned: return "realigned";
    }
    return "?";
}

Matrix RecoveredLatents::concat() const { return concat_cols(z1, z2); }

RecoveredLatents assemble(const ModelParams& params, const MultiViewDataset& ds,
                          const PartitionMasks& masks, const IndexVec& realignment_map,
                          const ImputationResult& imputed) {
    const index_t n = ds.n();
    const index_t d_z = params.d_z;
    if (realignment_map.size() != masks.unaligned_idx.size())
        throw ConfigError("assemble: realignment map does not cover the unaligned set");
    if (imputed.rows != masks.missing_idx)
        throw ConfigError("assemble: imputation result does not cover the missing set");

    RecoveredLatents out;
    out.z1 = Matrix(n, d_z);
    out.z2 = Matrix(n, d_z);
    out.tag1.assign(n, Provenance::encoded);
    out.tag2.assign(n, Provenance::encoded);
    out.realignment_map = realignment_map;

    std::vector<bool> absent1(n, false), absent2(n, false);
    for (index_t t = 0; t < masks.missing_idx.size(); ++t)
        (masks.missing_view[t] == 1 ? absent1 : absent2)[masks.missing_idx[t]] = true;

    // View 1: encode everything that is observed.
    IndexVec v1_rows;
    for (index_t i = 0; i < n; ++i)
        if (!absent1[i]) v1_rows.push_back(i);
    {
        const Matrix z = encode(params, 0, gather_rows(ds.views[0], v1_rows));
        for (index_t i = 0; i < v1_rows.size(); ++i)
            std::copy_n(z.data() + i * d_z, d_z, out.z1.data() + v1_rows[i] * d_z);
    }

    // View 2: encode the observed (possibly shuffled) rows.
    const Matrix x2_obs = observed_view2(ds, masks);
    IndexVec v2_rows;
    for (index_t i = 0; i < n; ++i)
        if (!absent2[i]) v2_rows.push_back(i);
    Matrix z2_obs(n, d_z);  // latent of the observed view-2 row at each position
    {
        const Matrix z = encode(params, 1, gather_rows(x2_obs, v2_rows));
        for (index_t i = 0; i < v2_rows.size(); ++i)
            std::copy_n(z.data() + i * d_z, d_z, z2_obs.data() + v2_rows[i] * d_z);
    }
    for (index_t i = 0; i < n; ++i)
        std::copy_n(z2_obs.data() + i * d_z, d_z, out.z2.data() + i * d_z);

    // Unaligned rows: pair instance unaligned_idx[t] with the observed
    // view-2 row at the recovered position.
    for (index_t t = 0; t < masks.unaligned_idx.size(); ++t) {
        const index_t i = masks.unaligned_idx[t];
        const index_t partner_pos = realignment_map[t];
        std::copy_n(z2_obs.data() + partner_pos * d_z, d_z, out.z2.data() + i * d_z);
        out.tag1[i] = Provenance::realigned;
        out.tag2[i] = Provenance::realigned;
    }

    // Missing rows: the absent view's latent comes from the dual predictor.
    for (index_t t = 0; t < masks.missing_idx.size(); ++t) {
        const index_t i = masks.missing_idx[t];
        if (masks.missing_view[t] == 1) {
            std::copy_n(imputed.imputed_latent.data() + t * d_z, d_z, out.z1.data() + i * d_z);
            out.tag1[i] = Provenance::imputed;
        } else {
            std::copy_n(imputed.imputed_latent.data() + t * d_z, d_z, out.z2.data() + i * d_z);
            out.tag2[i] = Provenance::imputed;
        }
    }

    if (!out.z1.is_finite() || !out.z2.is_finite())
        throw NumericError("assemble: recovered latents contain non-finite values");
    return out;
}

std::vector<Matrix> decode_recovered(const ModelParams& params,
                                     const RecoveredLatents& recovered) {
    const Matrix zc = recovered.concat();
    std::vector<Matrix> views;
    for (index_t v = 0; v < params.n_views(); ++v) views.push_back(decode(params, v, zc));
    return views;
}

}  // namespace hmimvc
