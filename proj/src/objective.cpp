#include "hmimvc/objective.hpp"

#include <cmath>
#include <limits>

namespace hmimvc {

namespace {

constexpr index_t kNoRow = std::numeric_limits<index_t>::max();

// Margin term tau·r^a − r^b, factored as r^a·(tau − r^(b−a)) so that
// saturation at r = tau^(1/(b−a)) is exact in floating point.
double neg_margin(double r, double tau, NegExponents exps) {
    if (r <= 0.0) return 0.0;
    return std::pow(r, exps.a) * (tau - std::pow(r, exps.b - exps.a));
}

// d/dr of the negative-pair loss, valid where the margin is positive.
double loss_negative_ddr(double r, double tau, NegExponents exps) {
    if (r <= 0.0) return 0.0;
    const double margin = neg_margin(r, tau, exps);
    if (margin <= 0.0) return 0.0;
    const double d_margin = tau * exps.a * std::pow(r, exps.a - 1.0) -
                            exps.b * std::pow(r, exps.b - 1.0);
    return 2.0 * margin * d_margin / tau;
}

}  // namespace

RowMap::RowMap(std::span<const index_t> batch_indices, index_t n_total)
    : map_(n_total, kNoRow) {
    for (index_t row = 0; row < batch_indices.size(); ++row) {
        if (batch_indices[row] >= n_total)
            throw std::invalid_argument("RowMap: dataset index out of range");
        map_[batch_indices[row]] = row;
    }
}

index_t RowMap::row_of(index_t dataset_index) const {
    if (dataset_index >= map_.size() || map_[dataset_index] == kNoRow)
        throw std::invalid_argument("RowMap: index " + std::to_string(dataset_index) +
                                    " is not in the batch");
    return map_[dataset_index];
}

Temperature compute_tau(const Matrix& z1, const Matrix& z2, const PairBatch& pairs,
                        const RowMap& rows) {
    double pos_sum = 0.0, neg_sum = 0.0;
    index_t n_p = 0, n_n = 0;
    for (index_t k = 0; k < pairs.size(); ++k) {
        const double d = euclidean_distance(z1.row(rows.row_of(pairs.anchor_idx[k])),
                                            z2.row(rows.row_of(pairs.partner_idx[k])));
        if (pairs.y[k] == 1) {
            pos_sum += d;
            ++n_p;
        } else {
            neg_sum += d;
            ++n_n;
        }
    }
    if (n_p == 0 || n_n == 0)
        throw ConfigError("compute_tau: needs at least one positive and one negative pair");
    Temperature t;
    t.n_p = n_p;
    t.n_n = n_n;
    t.tau = pos_sum / static_cast<double>(n_p) + neg_sum / static_cast<double>(n_n);
    if (!(t.tau > 1e-12))
        throw NumericError("degenerate temperature: initial latents are identical (tau = " +
                           std::to_string(t.tau) + ")");
    return t;
}

double loss_positive(std::span<const double> z1_row, std::span<const double> z2_row) {
    return squared_distance(z1_row, z2_row);
}

double loss_negative_at(double r, double tau, NegExponents exps) {
    if (!(tau > 0.0)) throw std::invalid_argument("loss_negative: tau must be positive");
    if (r < 0.0) throw std::invalid_argument("loss_negative: distance must be >= 0");
    const double margin = neg_margin(r, tau, exps);
    if (margin <= 0.0) return 0.0;
    return margin * margin / tau;
}

double loss_negative(std::span<const double> z1_row, std::span<const double> z2_row, double tau,
                     NegExponents exps) {
    return loss_negative_at(euclidean_distance(z1_row, z2_row), tau, exps);
}

double contrastive_loss(const Matrix& z1, const Matrix& z2, const PairBatch& pairs,
                        const RowMap& rows, double tau, NegExponents exps) {
    if (pairs.size() == 0) throw ConfigError("contrastive_loss: empty pair batch");
    double sum = 0.0;
    for (index_t k = 0; k < pairs.size(); ++k) {
        const auto a = z1.row(rows.row_of(pairs.anchor_idx[k]));
        const auto b = z2.row(rows.row_of(pairs.partner_idx[k]));
        sum += pairs.y[k] == 1 ? loss_positive(a, b) : loss_negative(a, b, tau, exps);
    }
    return sum / (2.0 * static_cast<double>(pairs.size()));
}

double prediction_loss(const ModelParams& params, const Matrix& z1, const Matrix& z2) {
    if (z1.rows() != z2.rows()) throw std::invalid_argument("prediction_loss: row mismatch");
    const Matrix p1 = predict_latent(params, 0, z1);
    const Matrix p2 = predict_latent(params, 1, z2);
    double sum = 0.0;
    for (index_t i = 0; i < z1.rows(); ++i) {
        sum += squared_distance(p1.row(i), z2.row(i));
        sum += squared_distance(p2.row(i), z1.row(i));
    }
    return sum / static_cast<double>(z1.rows());
}

double reconstruction_loss(const ModelParams& params, const Matrix& x1, const Matrix& x2,
                           const Matrix& z1, const Matrix& z2) {
    if (x1.rows() != z1.rows() || x2.rows() != z2.rows() || x1.rows() != x2.rows())
        throw std::invalid_argument("reconstruction_loss: row mismatch");
    const Matrix zc = concat_cols(z1, z2);
    const Matrix r1 = decode(params, 0, zc);
    const Matrix r2 = decode(params, 1, zc);
    double sum = 0.0;
    for (index_t i = 0; i < x1.rows(); ++i) {
        sum += squared_distance(x1.row(i), r1.row(i));
        sum += squared_distance(x2.row(i), r2.row(i));
    }
    return sum / (2.0 * static_cast<double>(x1.rows()));
}

LossBreakdown total_loss(const ModelParams& params, const Matrix& x1, const Matrix& x2,
                         const PairBatch& pairs, const RowMap& rows, const LossMask& mask,
                         const Temperature* tau, NegExponents exps) {
    const Matrix z1 = encode(params, 0, x1);
    const Matrix z2 = encode(params, 1, x2);
    LossBreakdown out;
    out.l_rec = reconstruction_loss(params, x1, x2, z1, z2);
    out.l_pre = prediction_loss(params, z1, z2);
    if (tau != nullptr) out.l_cl = contrastive_loss(z1, z2, pairs, rows, tau->tau, exps);
    out.total = (mask.rec ? out.l_rec : 0.0) + (mask.pre ? out.l_pre : 0.0) +
                (mask.cl ? out.l_cl : 0.0);
    return out;
}

BatchLoss compute_batch(ModelParams& params, const Matrix& x1, const Matrix& x2,
                        const PairBatch& pairs, const RowMap& rows, const LossMask& mask,
                        const Temperature* tau, NegExponents exps, bool update_running) {
    if (!mask.any()) throw std::invalid_argument("compute_batch: empty loss mask");
    if (mask.cl && tau == nullptr)
        throw std::invalid_argument("compute_batch: contrastive loss requires a temperature");
    const index_t b = x1.rows();
    const double bf = static_cast<double>(b);

    BatchLoss out;
    out.grads = make_grads(params);

    MlpCache enc_cache1, enc_cache2;
    const Matrix z1 = mlp_forward_train(params.encoders[0], x1, enc_cache1, update_running);
    const Matrix z2 = mlp_forward_train(params.encoders[1], x2, enc_cache2, update_running);
    Matrix dz1(b, params.d_z), dz2(b, params.d_z);

    // Reconstruction: L_rec = (1/(2B))·Σ_i Σ_v ‖x_i − g_v([z1,z2])‖².
    const Matrix zc = concat_cols(z1, z2);
    {
        MlpCache dec_cache1, dec_cache2;
        const Matrix r1 = mask.rec
                              ? mlp_forward_train(params.decoders[0], zc, dec_cache1, update_running)
                              : mlp_forward_eval(params.decoders[0], zc);
        const Matrix r2 = mask.rec
                              ? mlp_forward_train(params.decoders[1], zc, dec_cache2, update_running)
                              : mlp_forward_eval(params.decoders[1], zc);
        double sum = 0.0;
        for (index_t i = 0; i < b; ++i) {
            sum += squared_distance(x1.row(i), r1.row(i));
            sum += squared_distance(x2.row(i), r2.row(i));
        }
        out.losses.l_rec = sum / (2.0 * bf);
        if (mask.rec) {
            Matrix dr1(b, r1.cols()), dr2(b, r2.cols());
            for (index_t i = 0; i < dr1.size(); ++i)
                dr1.storage()[i] = (r1.storage()[i] - x1.storage()[i]) / bf;
            for (index_t i = 0; i < dr2.size(); ++i)
                dr2.storage()[i] = (r2.storage()[i] - x2.storage()[i]) / bf;
            const Matrix dzc1 = mlp_backward(params.decoders[0], dec_cache1, dr1, out.grads.decoders[0]);
            const Matrix dzc2 = mlp_backward(params.decoders[1], dec_cache2, dr2, out.grads.decoders[1]);
            for (index_t i = 0; i < b; ++i)
                for (index_t j = 0; j < params.d_z; ++j) {
                    dz1(i, j) += dzc1(i, j) + dzc2(i, j);
                    dz2(i, j) += dzc1(i, j + params.d_z) + dzc2(i, j + params.d_z);
                }
        }
    }

    // Dual prediction: L_pre = (1/B)·Σ_i ‖d1(z1)−z2‖² + ‖d2(z2)−z1‖².
    // Gradients flow through the predictors and into both latents (the
    // target side is not detached).
    {
        MlpCache pred_cache1, pred_cache2;
        const Matrix p1 = mask.pre
                              ? mlp_forward_train(params.predictors[0], z1, pred_cache1, update_running)
                              : mlp_forward_eval(params.predictors[0], z1);
        const Matrix p2 = mask.pre
                              ? mlp_forward_train(params.predictors[1], z2, pred_cache2, update_running)
                              : mlp_forward_eval(params.predictors[1], z2);
        double sum = 0.0;
        for (index_t i = 0; i < b; ++i) {
            sum += squared_distance(p1.row(i), z2.row(i));
            sum += squared_distance(p2.row(i), z1.row(i));
        }
        out.losses.l_pre = sum / bf;
        if (mask.pre) {
            Matrix dp1(b, params.d_z), dp2(b, params.d_z);
            for (index_t i = 0; i < dp1.size(); ++i) {
                dp1.storage()[i] = 2.0 * (p1.storage()[i] - z2.storage()[i]) / bf;
                dp2.storage()[i] = 2.0 * (p2.storage()[i] - z1.storage()[i]) / bf;
            }
            const Matrix dz1_pred =
                mlp_backward(params.predictors[0], pred_cache1, dp1, out.grads.predictors[0]);
            const Matrix dz2_pred =
                mlp_backward(params.predictors[1], pred_cache2, dp2, out.grads.predictors[1]);
            for (index_t i = 0; i < dz1.size(); ++i) {
                dz1.storage()[i] += dz1_pred.storage()[i] - dp2.storage()[i];
                dz2.storage()[i] += dz2_pred.storage()[i] - dp1.storage()[i];
            }
        }
    }

    // Contrastive: L_cl = (1/(2P))·Σ_k [Y·L_pos + (1−Y)·L_neg].
    if (tau != nullptr && pairs.size() > 0) {
        const double scale = 1.0 / (2.0 * static_cast<double>(pairs.size()));
        double sum = 0.0;
        for (index_t k = 0; k < pairs.size(); ++k) {
            const index_t ar = rows.row_of(pairs.anchor_idx[k]);
            const index_t br = rows.row_of(pairs.partner_idx[k]);
            if (pairs.y[k] == 1) {
                sum += loss_positive(z1.row(ar), z2.row(br));
                if (mask.cl) {
                    for (index_t j = 0; j < params.d_z; ++j) {
                        const double g = 2.0 * scale * (z1(ar, j) - z2(br, j));
                        dz1(ar, j) += g;
                        dz2(br, j) -= g;
                    }
                }
            } else {
                const double r = euclidean_distance(z1.row(ar), z2.row(br));
                sum += loss_negative_at(r, tau->tau, exps);
                if (mask.cl && r > 0.0) {
                    const double ddr = loss_negative_ddr(r, tau->tau, exps);
                    if (ddr != 0.0) {
                        for (index_t j = 0; j < params.d_z; ++j) {
                            const double g = scale * ddr * (z1(ar, j) - z2(br, j)) / r;
                            dz1(ar, j) += g;
                            dz2(br, j) -= g;
                        }
                    }
                }
            }
        }
        out.losses.l_cl = sum * scale;
    }

    mlp_backward(params.encoders[0], enc_cache1, dz1, out.grads.encoders[0]);
    mlp_backward(params.encoders[1], enc_cache2, dz2, out.grads.encoders[1]);

    out.losses.total = (mask.rec ? out.losses.l_rec : 0.0) + (mask.pre ? out.losses.l_pre : 0.0) +
                       (mask.cl ? out.losses.l_cl : 0.0);
    return out;
}

}  // namespace hmimvc
