#pragma once

#include <string>

#include "hmimvc/layers.hpp"
#include "hmimvc/rng.hpp"

namespace hmimvc {

/// Dense stack: hidden layers are linear→batchnorm→ReLU, the head is
/// affine so outputs and latents keep sign and range.
struct Mlp {
    std::vector<LayerParams> layers;

    index_t in_dim() const { return layers.front().in_dim(); }
    index_t out_dim() const { return layers.back().out_dim(); }
};

Mlp make_mlp(index_t in, const std::vector<index_t>& hidden, index_t out, Rng& rng);

/// Per-layer activations recorded by the train-mode forward pass.
struct MlpCache {
    std::vector<Matrix> inputs;    // input to each layer
    std::vector<Matrix> pre_bn;    // linear output
    std::vector<BnTrainCache> bn;  // batch stats (layers with bn only)
    std::vector<Matrix> pre_act;   // input to the ReLU mask
    Matrix output;
};

/// Gradients mirroring the trainable blocks of an Mlp.
struct MlpGrads {
    std::vector<Matrix> d_weight;
    std::vector<Vector> d_bias, d_gamma, d_beta;
};

MlpGrads make_grads(const Mlp& mlp);

Matrix mlp_forward_eval(const Mlp& mlp, const Matrix& x);
Matrix mlp_forward_train(Mlp& mlp, const Matrix& x, MlpCache& cache, bool update_running = true);

/// Backward through a cached train-mode pass. Accumulates into `grads`
/// and returns dL/dinput.
Matrix mlp_backward(const Mlp& mlp, const MlpCache& cache, const Matrix& d_out, MlpGrads& grads);

/// Visits every trainable block (weight, bias, then γ, β where present)
/// of every layer, in a fixed order shared by the optimizer, the
/// checkpoint format, and the flatten helpers.
template <typename MlpT, typename Fn>
void visit_trainable(MlpT& mlp, const std::string& name, Fn&& fn) {
    for (index_t li = 0; li < mlp.layers.size(); ++li) {
        auto& l = mlp.layers[li];
        const std::string base = name + ".layer" + std::to_string(li);
        fn(base + ".weight", l.weight.storage());
        fn(base + ".bias", l.bias);
        if (l.has_bn) {
            fn(base + ".bn_gamma", l.bn_gamma);
            fn(base + ".bn_beta", l.bn_beta);
        }
    }
}

/// Same walk over a gradient mirror alone (an empty d_gamma marks a layer
/// without batch norm).
template <typename Fn>
void visit_mlp_grads(const MlpGrads& grads, Fn&& fn) {
    for (index_t li = 0; li < grads.d_weight.size(); ++li) {
        fn(grads.d_weight[li].storage());
        fn(grads.d_bias[li]);
        if (!grads.d_gamma[li].empty()) {
            fn(grads.d_gamma[li]);
            fn(grads.d_beta[li]);
        }
    }
}

/// Same walk with the matching gradient block alongside each parameter block.
template <typename Fn>
void visit_trainable_pair(Mlp& mlp, const MlpGrads& grads, const std::string& name, Fn&& fn) {
    for (index_t li = 0; li < mlp.layers.size(); ++li) {
        auto& l = mlp.layers[li];
        const std::string base = name + ".layer" + std::to_string(li);
        fn(base + ".weight", l.weight.storage(), grads.d_weight[li].storage());
        fn(base + ".bias", l.bias, grads.d_bias[li]);
        if (l.has_bn) {
            fn(base + ".bn_gamma", l.bn_gamma, grads.d_gamma[li]);
            fn(base + ".bn_beta", l.bn_beta, grads.d_beta[li]);
        }
    }
}

index_t trainable_count(const Mlp& mlp);

}  // namespace hmimvc
