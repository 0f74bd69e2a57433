#pragma once

#include <functional>
#include <span>
#include <string_view>

#include "hmimvc/matrix.hpp"

namespace hmimvc {

enum class Mode { train, eval };

inline constexpr double kBnEps = 1e-5;
// Running stats: new = kBnMomentum·old + (1−kBnMomentum)·batch.
inline constexpr double kBnMomentum = 0.9;

/// One dense layer: y = relu(bn(x·Wᵀ + b)). Batch norm and ReLU are
/// optional; output/latent heads are affine only.
struct LayerParams {
    Matrix weight;  // out×in
    Vector bias;    // out
    Vector bn_gamma, bn_beta, bn_running_mean, bn_running_var;  // out; empty unless has_bn
    bool has_bn = false;
    bool has_relu = false;

    index_t in_dim() const { return weight.cols(); }
    index_t out_dim() const { return weight.rows(); }
};

LayerParams make_layer(index_t in, index_t out, bool bn, bool relu_act, class Rng& rng);

// ---- forward primitives ----

Matrix linear_forward(const Matrix& x, const LayerParams& p);

/// Per-feature batch statistics captured by the train-mode forward pass;
/// the backward pass needs them.
struct BnTrainCache {
    Vector mean, var;  // biased (1/B) variance
    Matrix x_hat;
};

/// Train mode normalizes by batch statistics and, when update_running is
/// set, folds them into the running estimates. Batch size must be ≥ 2.
Matrix batchnorm_train(const Matrix& x, LayerParams& p, BnTrainCache* cache = nullptr,
                       bool update_running = true);
Matrix batchnorm_eval(const Matrix& x, const LayerParams& p);
Matrix batchnorm_forward(const Matrix& x, LayerParams& p, Mode mode);

Matrix relu(const Matrix& x);

// ---- backward primitives (train mode) ----

/// Returns dL/dx and accumulates dL/dW, dL/db.
Matrix linear_backward(const Matrix& d_y, const Matrix& x, const LayerParams& p,
                       Matrix& d_weight, Vector& d_bias);

/// Returns dL/dx through the batch statistics and accumulates dγ, dβ.
Matrix batchnorm_backward(const Matrix& d_y, const LayerParams& p, const BnTrainCache& cache,
                          Vector& d_gamma, Vector& d_beta);

/// dL/dx = dL/dy masked by pre_activation > 0.
Matrix relu_backward(const Matrix& d_y, const Matrix& pre_activation);

// ---- Adam ----

struct AdamState {
    std::uint64_t step = 0;
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    Vector m, v;  // first/second moments, flat over all parameters
};

/// One Adam update over a flat parameter vector. Moments are lazily sized
/// on first call; step advances by exactly one.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state);

/// Updates a sub-range [offset, offset+len) of the moment vectors without
/// advancing step. The model trainer walks its parameter blocks through
/// this and advances step once per whole-model update.
void adam_update_block(std::span<double> params, std::span<const double> grads, AdamState& state,
                       index_t offset, std::string_view block_name);

// ---- gradient checking ----

using ScalarFn = std::function<double(std::span<const double>)>;

/// Central-difference check: max over coordinates of
/// |analytic − numeric| / max(1, |analytic|). h must lie in [1e-7, 1e-3].
double grad_check(const ScalarFn& f, std::span<const double> point,
                  std::span<const double> analytic, double h = 1e-5);

}  // namespace hmimvc
