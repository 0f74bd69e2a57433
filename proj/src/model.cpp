#include "hmimvc/model.hpp"

namespace hmimvc {

ModelParams init_params(const std::vector<index_t>& view_dims, index_t d_z,
                        const std::vector<index_t>& hidden, std::uint64_t seed) {
    if (d_z < 1) throw ConfigError("latent dimension must be >= 1");
    if (view_dims.size() < 2) throw ConfigError("model needs at least two views");
    for (index_t h : hidden)
        if (h < 1) throw ConfigError("hidden widths must be >= 1");

    ModelParams p;
    p.d_z = d_z;
    p.view_dims = view_dims;
    p.hidden = hidden;
    Rng rng(derive_seed(seed, seed_tag::init_params));
    const index_t v_count = view_dims.size();
    std::vector<index_t> mirrored(hidden.rbegin(), hidden.rend());
    for (index_t v = 0; v < v_count; ++v)
        p.encoders.push_back(make_mlp(view_dims[v], hidden, d_z, rng));
    for (index_t v = 0; v < v_count; ++v)
        p.decoders.push_back(make_mlp(v_count * d_z, mirrored, view_dims[v], rng));
    for (index_t v = 0; v < v_count; ++v)
        p.predictors.push_back(make_mlp(d_z, hidden, d_z, rng));
    return p;
}

Matrix encode(const ModelParams& params, index_t view, const Matrix& x) {
    if (view >= params.n_views()) throw std::invalid_argument("encode: bad view index");
    return mlp_forward_eval(params.encoders[view], x);
}

Matrix decode(const ModelParams& params, index_t view, const Matrix& z_concat) {
    if (view >= params.n_views()) throw std::invalid_argument("decode: bad view index");
    return mlp_forward_eval(params.decoders[view], z_concat);
}

Matrix predict_latent(const ModelParams& params, index_t from_view, const Matrix& z) {
    if (from_view >= params.n_views())
        throw std::invalid_argument("predict_latent: bad view index");
    return mlp_forward_eval(params.predictors[from_view], z);
}

ModelGrads make_grads(const ModelParams& params) {
    ModelGrads g;
    for (const auto& m : params.encoders) g.encoders.push_back(make_grads(m));
    for (const auto& m : params.decoders) g.decoders.push_back(make_grads(m));
    for (const auto& m : params.predictors) g.predictors.push_back(make_grads(m));
    return g;
}

index_t trainable_count(const ModelParams& params) {
    index_t n = 0;
    for (const auto& m : params.encoders) n += trainable_count(m);
    for (const auto& m : params.decoders) n += trainable_count(m);
    for (const auto& m : params.predictors) n += trainable_count(m);
    return n;
}

void apply_adam(ModelParams& params, const ModelGrads& grads, AdamState& state) {
    const index_t total = trainable_count(params);
    if (state.m.empty()) {
        state.m.assign(total, 0.0);
        state.v.assign(total, 0.0);
    }
    if (state.m.size() != total)
        throw std::invalid_argument("apply_adam: optimizer state does not match the model");
    state.step += 1;
    index_t offset = 0;
    visit_model_pair(params, grads,
                     [&](const std::string& name, Vector& p, const Vector& g) {
                         adam_update_block(p, g, state, offset, name);
                         offset += p.size();
                     });
}

Vector flatten_params(const ModelParams& params) {
    Vector flat;
    flat.reserve(trainable_count(params));
    visit_model(params, [&](const std::string&, const Vector& block) {
        flat.insert(flat.end(), block.begin(), block.end());
    });
    return flat;
}

void unflatten_params(ModelParams& params, std::span<const double> flat) {
    index_t offset = 0;
    visit_model(params, [&](const std::string&, Vector& block) {
        if (offset + block.size() > flat.size())
            throw std::invalid_argument("unflatten_params: flat vector too short");
        std::copy_n(flat.begin() + offset, block.size(), block.begin());
        offset += block.size();
    });
    if (offset != flat.size())
        throw std::invalid_argument("unflatten_params: flat vector length mismatch");
}

Vector flatten_grads(const ModelParams& params, const ModelGrads& grads) {
    Vector flat;
    flat.reserve(trainable_count(params));
    const auto append = [&](const Vector& g) { flat.insert(flat.end(), g.begin(), g.end()); };
    for (const auto& g : grads.encoders) visit_mlp_grads(g, append);
    for (const auto& g : grads.decoders) visit_mlp_grads(g, append);
    for (const auto& g : grads.predictors) visit_mlp_grads(g, append);
    return flat;
}

}  // namespace hmimvc
