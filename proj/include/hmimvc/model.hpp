#pragma once

#include "hmimvc/mlp.hpp"

namespace hmimvc {

/// Per-view encoder, decoder, and cross-view predictor stacks.
/// Encoder v: view_dims[v] → d_z. Decoder v: V·d_z → view_dims[v] (it sees
/// the concatenated latents of all views). Predictor v: d_z → d_z, mapping
/// the latent of view v to the latent of the other view.
struct ModelParams {
    index_t d_z = 10;
    std::vector<index_t> view_dims;
    std::vector<index_t> hidden;
    std::vector<Mlp> encoders;
    std::vector<Mlp> decoders;
    std::vector<Mlp> predictors;

    index_t n_views() const { return encoders.size(); }
};

/// Fan-in-scaled Gaussian weights, zero biases, unit batch-norm scale.
/// Bit-identical for a fixed seed.
ModelParams init_params(const std::vector<index_t>& view_dims, index_t d_z,
                        const std::vector<index_t>& hidden, std::uint64_t seed);

// Eval-mode forward passes; pure in (params, input).
Matrix encode(const ModelParams& params, index_t view, const Matrix& x);
Matrix decode(const ModelParams& params, index_t view, const Matrix& z_concat);
Matrix predict_latent(const ModelParams& params, index_t from_view, const Matrix& z);

struct ModelGrads {
    std::vector<MlpGrads> encoders, decoders, predictors;
};

ModelGrads make_grads(const ModelParams& params);
index_t trainable_count(const ModelParams& params);

/// Fixed block order shared by the optimizer, checkpoints, and the
/// flatten helpers: encoders by view, then decoders, then predictors.
template <typename ModelT, typename Fn>
void visit_model(ModelT& params, Fn&& fn) {
    for (index_t v = 0; v < params.encoders.size(); ++v)
        visit_trainable(params.encoders[v], "enc" + std::to_string(v), fn);
    for (index_t v = 0; v < params.decoders.size(); ++v)
        visit_trainable(params.decoders[v], "dec" + std::to_string(v), fn);
    for (index_t v = 0; v < params.predictors.size(); ++v)
        visit_trainable(params.predictors[v], "pred" + std::to_string(v), fn);
}

template <typename Fn>
void visit_model_pair(ModelParams& params, const ModelGrads& grads, Fn&& fn) {
    for (index_t v = 0; v < params.encoders.size(); ++v)
        visit_trainable_pair(params.encoders[v], grads.encoders[v], "enc" + std::to_string(v), fn);
    for (index_t v = 0; v < params.decoders.size(); ++v)
        visit_trainable_pair(params.decoders[v], grads.decoders[v], "dec" + std::to_string(v), fn);
    for (index_t v = 0; v < params.predictors.size(); ++v)
        visit_trainable_pair(params.predictors[v], grads.predictors[v], "pred" + std::to_string(v),
                             fn);
}

/// One Adam update over every trainable block; advances state.step once.
/// Moments are lazily sized to the model on first use.
void apply_adam(ModelParams& params, const ModelGrads& grads, AdamState& state);

// Flat views of the trainable parameters, in visit_model order. Used by
// gradient checks and tests.
Vector flatten_params(const ModelParams& params);
void unflatten_params(ModelParams& params, std::span<const double> flat);
Vector flatten_grads(const ModelParams& params, const ModelGrads& grads);

}  // namespace hmimvc
