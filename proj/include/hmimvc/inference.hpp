#pragma once

#include "hmimvc/corruption.hpp"
#include "hmimvc/model.hpp"

namespace hmimvc {

/// Latents for the missing set W: the observed view encoded, the absent
/// view predicted from it by the matching dual predictor. Row t
/// corresponds to masks.missing_idx[t].
struct ImputationResult {
    IndexVec rows;
    Matrix present_latent;
    Matrix imputed_latent;
};

ImputationResult impute_missing(const ModelParams& params, const MultiViewDataset& ds,
                                const PartitionMasks& masks);

/// Mean-fill baseline: the absent raw view is replaced by that view's
/// column mean over the complete set, then encoded.
struct MeanFillBaseline {
    std::vector<Vector> view_means;  // per view, column mean over X
    IndexVec rows;
    Matrix imputed_latent;
};

MeanFillBaseline impute_mean_baseline(const ModelParams& params, const MultiViewDataset& ds,
                                      const PartitionMasks& masks);

enum class RealignMethod { hungarian, greedy };

/// Recovers the view-1 ↔ view-2 correspondence on the unaligned set from
/// the |S|×|S| matrix of Euclidean latent distances. Returns dataset
/// indices: result[t] is the position whose observed view-2 row pairs
/// with instance masks.unaligned_idx[t]. Hungarian minimizes the total
/// distance; greedy takes nearest unused neighbors in row order. Ties go
/// to the smaller index.
IndexVec realign(const ModelParams& params, const MultiViewDataset& ds,
                 const PartitionMasks& masks, RealignMethod method);

enum class Provenance { encoded, imputed, realigned };

const char* provenance_name(Provenance p);

/// Full-dataset latents with per-row, per-view provenance. Rows follow
/// dataset order.
struct RecoveredLatents {
    Matrix z1, z2;  // N×d_z each
    std::vector<Provenance> tag1, tag2;
    IndexVec realignment_map;  // over masks.unaligned_idx order

    Matrix concat() const;  // N×(2·d_z)
};

/// Stitches the three subsets together: X rows encoded directly, S rows
/// paired through the recovered correspondence, W rows one encoded + one
/// imputed latent.
RecoveredLatents assemble(const ModelParams& params, const MultiViewDataset& ds,
                          const PartitionMasks& masks, const IndexVec& realignment_map,
                          const ImputationResult& imputed);

/// Raw-space recovery for inspection: g_v applied to the concatenated
/// recovered latents. Returns one matrix per view, N×d_v.
std::vector<Matrix> decode_recovered(const ModelParams& params, const RecoveredLatents& recovered);

}  // namespace hmimvc
