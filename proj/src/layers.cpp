#include "hmimvc/layers.hpp"

#include <cmath>
#include <string>

#include "hmimvc/rng.hpp"

namespace hmimvc {

LayerParams make_layer(index_t in, index_t out, bool bn, bool relu_act, Rng& rng) {
    LayerParams p;
    p.weight = Matrix(out, in);
    const double stddev = std::sqrt(2.0 / static_cast<double>(in));
    for (index_t i = 0; i < out; ++i)
        for (index_t j = 0; j < in; ++j) p.weight(i, j) = rng.normal(0.0, stddev);
    p.bias.assign(out, 0.0);
    p.has_bn = bn;
    p.has_relu = relu_act;
    if (bn) {
        p.bn_gamma.assign(out, 1.0);
        p.bn_beta.assign(out, 0.0);
        p.bn_running_mean.assign(out, 0.0);
        p.bn_running_var.assign(out, 1.0);
    }
    return p;
}

Matrix linear_forward(const Matrix& x, const LayerParams& p) {
    if (x.cols() != p.in_dim())
        throw std::invalid_argument("linear_forward: input has " + std::to_string(x.cols()) +
                                    " cols, layer expects " + std::to_string(p.in_dim()));
    Matrix y = gemm_nt(x, p.weight);
    add_row_broadcast(y, p.bias);
    return y;
}

Matrix batchnorm_train(const Matrix& x, LayerParams& p, BnTrainCache* cache,
                       bool update_running) {
    const index_t b = x.rows(), f = x.cols();
    if (f != p.bn_gamma.size())
        throw std::invalid_argument("batchnorm: feature count mismatch");
    if (b < 2)
        throw std::invalid_argument("batchnorm: train mode needs a batch of >= 2, got " +
                                    std::to_string(b));
    Vector mean(f, 0.0), var(f, 0.0);
    for (index_t i = 0; i < b; ++i)
        for (index_t j = 0; j < f; ++j) mean[j] += x(i, j);
    for (index_t j = 0; j < f; ++j) mean[j] /= static_cast<double>(b);
    for (index_t i = 0; i < b; ++i)
        for (index_t j = 0; j < f; ++j) {
            const double d = x(i, j) - mean[j];
            var[j] += d * d;
        }
    for (index_t j = 0; j < f; ++j) var[j] /= static_cast<double>(b);

    Matrix x_hat(b, f);
    Matrix y(b, f);
    Vector inv_std(f);
    for (index_t j = 0; j < f; ++j) inv_std[j] = 1.0 / std::sqrt(var[j] + kBnEps);
    for (index_t i = 0; i < b; ++i)
        for (index_t j = 0; j < f; ++j) {
            const double xh = (x(i, j) - mean[j]) * inv_std[j];
            x_hat(i, j) = xh;
            y(i, j) = p.bn_gamma[j] * xh + p.bn_beta[j];
        }

    if (update_running) {
        for (index_t j = 0; j < f; ++j) {
            p.bn_running_mean[j] = kBnMomentum * p.bn_running_mean[j] + (1.0 - kBnMomentum) * mean[j];
            p.bn_running_var[j] = kBnMomentum * p.bn_running_var[j] + (1.0 - kBnMomentum) * var[j];
        }
    }
    if (cache != nullptr) {
        cache->mean = std::move(mean);
        cache->var = std::move(var);
        cache->x_hat = x_hat;
    }
    return y;
}

Matrix batchnorm_eval(const Matrix& x, const LayerParams& p) {
    const index_t b = x.rows(), f = x.cols();
    if (f != p.bn_gamma.size())
        throw std::invalid_argument("batchnorm: feature count mismatch");
    Matrix y(b, f);
    for (index_t j = 0; j < f; ++j) {
        const double inv_std = 1.0 / std::sqrt(p.bn_running_var[j] + kBnEps);
        const double scale = p.bn_gamma[j] * inv_std;
        const double shift = p.bn_beta[j] - scale * p.bn_running_mean[j];
        for (index_t i = 0; i < b; ++i) y(i, j) = scale * x(i, j) + shift;
    }
    return y;
}

Matrix batchnorm_forward(const Matrix& x, LayerParams& p, Mode mode) {
    return mode == Mode::train ? batchnorm_train(x, p) : batchnorm_eval(x, p);
}

Matrix relu(const Matrix& x) {
    Matrix y = x;
    for (double& v : y.storage())
        if (v < 0.0) v = 0.0;
    return y;
}

Matrix linear_backward(const Matrix& d_y, const Matrix& x, const LayerParams& p,
                       Matrix& d_weight, Vector& d_bias) {
    // y = x·Wᵀ + b  →  dW = dyᵀ·x, db = column sums of dy, dx = dy·W
    Matrix dw = gemm_tn(d_y, x);
    if (d_weight.empty()) d_weight = Matrix(p.weight.rows(), p.weight.cols());
    for (index_t i = 0; i < dw.size(); ++i) d_weight.storage()[i] += dw.storage()[i];
    if (d_bias.empty()) d_bias.assign(p.bias.size(), 0.0);
    for (index_t i = 0; i < d_y.rows(); ++i)
        for (index_t j = 0; j < d_y.cols(); ++j) d_bias[j] += d_y(i, j);
    return gemm_nn(d_y, p.weight);
}

Matrix batchnorm_backward(const Matrix& d_y, const LayerParams& p, const BnTrainCache& cache,
                          Vector& d_gamma, Vector& d_beta) {
    const index_t b = d_y.rows(), f = d_y.cols();
    if (d_gamma.empty()) d_gamma.assign(f, 0.0);
    if (d_beta.empty()) d_beta.assign(f, 0.0);

    Vector sum_dxhat(f, 0.0), sum_dxhat_xhat(f, 0.0);
    Matrix d_xhat(b, f);
    for (index_t i = 0; i < b; ++i)
        for (index_t j = 0; j < f; ++j) {
            d_gamma[j] += d_y(i, j) * cache.x_hat(i, j);
            d_beta[j] += d_y(i, j);
            const double dxh = d_y(i, j) * p.bn_gamma[j];
            d_xhat(i, j) = dxh;
            sum_dxhat[j] += dxh;
            sum_dxhat_xhat[j] += dxh * cache.x_hat(i, j);
        }

    Matrix d_x(b, f);
    const double inv_b = 1.0 / static_cast<double>(b);
    for (index_t j = 0; j < f; ++j) {
        const double inv_std = 1.0 / std::sqrt(cache.var[j] + kBnEps);
        for (index_t i = 0; i < b; ++i) {
            d_x(i, j) = inv_b * inv_std *
                        (static_cast<double>(b) * d_xhat(i, j) - sum_dxhat[j] -
                         cache.x_hat(i, j) * sum_dxhat_xhat[j]);
        }
    }
    return d_x;
}

Matrix relu_backward(const Matrix& d_y, const Matrix& pre_activation) {
    if (d_y.rows() != pre_activation.rows() || d_y.cols() != pre_activation.cols())
        throw std::invalid_argument("relu_backward: shape mismatch");
    Matrix d_x = d_y;
    for (index_t i = 0; i < d_x.size(); ++i)
        if (pre_activation.storage()[i] <= 0.0) d_x.storage()[i] = 0.0;
    return d_x;
}

void adam_update_block(std::span<double> params, std::span<const double> grads, AdamState& state,
                       index_t offset, std::string_view block_name) {
    if (params.size() != grads.size())
        throw std::invalid_argument("adam: parameter/gradient size mismatch");
    if (offset + params.size() > state.m.size())
        throw std::invalid_argument("adam: block exceeds moment storage");
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (index_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        if (!std::isfinite(g))
            throw NumericError("adam: non-finite gradient in block '" + std::string(block_name) +
                               "' at element " + std::to_string(i));
        double& m = state.m[offset + i];
        double& v = state.v[offset + i];
        m = state.beta1 * m + (1.0 - state.beta1) * g;
        v = state.beta2 * v + (1.0 - state.beta2) * g * g;
        const double m_hat = m / bc1;
        const double v_hat = v / bc2;
        params[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state) {
    if (state.m.empty()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
    }
    if (state.m.size() != params.size())
        throw std::invalid_argument("adam: state sized for " + std::to_string(state.m.size()) +
                                    " parameters, got " + std::to_string(params.size()));
    state.step += 1;
    adam_update_block(params, grads, state, 0, "params");
}

double grad_check(const ScalarFn& f, std::span<const double> point,
                  std::span<const double> analytic, double h) {
    if (h < 1e-7 || h > 1e-3)
        throw std::invalid_argument("grad_check: h must lie in [1e-7, 1e-3]");
    if (point.size() != analytic.size())
        throw std::invalid_argument("grad_check: point/gradient size mismatch");
    Vector x(point.begin(), point.end());
    double worst = 0.0;
    for (index_t i = 0; i < x.size(); ++i) {
        const double saved = x[i];
        x[i] = saved + h;
        const double fp = f(x);
        x[i] = saved - h;
        const double fm = f(x);
        x[i] = saved;
        const double numeric = (fp - fm) / (2.0 * h);
        const double denom = std::max(1.0, std::abs(analytic[i]));
        worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
    }
    return worst;
}

}  // namespace hmimvc
