#pragma once

#include "hmimvc/corruption.hpp"
#include "hmimvc/model.hpp"

namespace hmimvc {

/// Margin scale of the noise-robust contrastive loss: the sum of the mean
/// positive and mean negative latent distances, fixed once per training
/// run at the end of the warm-up stage.
struct Temperature {
    double tau = 0.0;
    index_t n_p = 0, n_n = 0;
};

/// Which objective components contribute gradients. Components outside
/// the mask are still evaluated (without side effects) and reported.
struct LossMask {
    bool rec = true;
    bool cl = true;
    bool pre = true;

    bool any() const { return rec || cl || pre; }
};

/// Component values for one batch or epoch. `total` is the sum of the
/// active components; with every component active it equals
/// l_cl + l_pre + l_rec.
struct LossBreakdown {
    double l_cl = 0.0, l_pre = 0.0, l_rec = 0.0;
    double total = 0.0;
};

/// Exponent pair of the negative-pair margin term tau·r^a − r^b.
struct NegExponents {
    double a = 0.5;
    double b = 1.5;
};

/// Maps dataset indices to rows of a batch latent matrix.
class RowMap {
public:
    RowMap(std::span<const index_t> batch_indices, index_t n_total);
    index_t row_of(index_t dataset_index) const;

private:
    IndexVec map_;
};

/// tau = mean positive Euclidean distance + mean negative Euclidean
/// distance over the given pairs. Throws NumericError when the latents
/// have collapsed (tau <= 1e-12).
Temperature compute_tau(const Matrix& z1, const Matrix& z2, const PairBatch& pairs,
                        const RowMap& rows);

/// Positive-pair loss: squared Euclidean distance.
double loss_positive(std::span<const double> z1_row, std::span<const double> z2_row);

/// Negative-pair loss on the distance r: (1/tau)·max(tau·r^a − r^b, 0)².
/// With the default exponents this equals r·(tau−r)²/tau for r < tau and
/// 0 for r >= tau.
double loss_negative_at(double r, double tau, NegExponents exps = {});
double loss_negative(std::span<const double> z1_row, std::span<const double> z2_row, double tau,
                     NegExponents exps = {});

/// (1/(2·|pairs|)) · Σ [Y·L_pos + (1−Y)·L_neg].
double contrastive_loss(const Matrix& z1, const Matrix& z2, const PairBatch& pairs,
                        const RowMap& rows, double tau, NegExponents exps = {});

/// Mean over rows of ‖d1(z1)−z2‖² + ‖d2(z2)−z1‖², predictors in eval mode.
double prediction_loss(const ModelParams& params, const Matrix& z1, const Matrix& z2);

/// (1/(2B)) · Σ_i Σ_v ‖x_i^(v) − g_v([z1_i, z2_i])‖², decoders in eval mode.
double reconstruction_loss(const ModelParams& params, const Matrix& x1, const Matrix& x2,
                           const Matrix& z1, const Matrix& z2);

/// Eval-mode evaluation of every component on raw batch inputs. l_cl is
/// reported as 0 when no temperature is available yet.
LossBreakdown total_loss(const ModelParams& params, const Matrix& x1, const Matrix& x2,
                         const PairBatch& pairs, const RowMap& rows, const LossMask& mask,
                         const Temperature* tau, NegExponents exps = {});

/// One training forward/backward over a batch: train-mode passes and
/// gradients for active components, side-effect-free eval passes to
/// report the inactive ones.
struct BatchLoss {
    LossBreakdown losses;
    ModelGrads grads;
};

BatchLoss compute_batch(ModelParams& params, const Matrix& x1, const Matrix& x2,
                        const PairBatch& pairs, const RowMap& rows, const LossMask& mask,
                        const Temperature* tau, NegExponents exps = {},
                        bool update_running = true);

}  // namespace hmimvc
