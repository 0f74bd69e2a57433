#include "hmimvc/mlp.hpp"

namespace hmimvc {

Mlp make_mlp(index_t in, const std::vector<index_t>& hidden, index_t out, Rng& rng) {
    if (in == 0 || out == 0) throw std::invalid_argument("make_mlp: zero-width layer");
    Mlp mlp;
    index_t prev = in;
    for (index_t h : hidden) {
        if (h == 0) throw std::invalid_argument("make_mlp: zero-width hidden layer");
        mlp.layers.push_back(make_layer(prev, h, /*bn=*/true, /*relu=*/true, rng));
        prev = h;
    }
    mlp.layers.push_back(make_layer(prev, out, /*bn=*/false, /*relu=*/false, rng));
    return mlp;
}

MlpGrads make_grads(const Mlp& mlp) {
    MlpGrads g;
    for (const auto& l : mlp.layers) {
        g.d_weight.emplace_back(l.weight.rows(), l.weight.cols());
        g.d_bias.emplace_back(l.bias.size(), 0.0);
        if (l.has_bn) {
            g.d_gamma.emplace_back(l.bn_gamma.size(), 0.0);
            g.d_beta.emplace_back(l.bn_beta.size(), 0.0);
        } else {
            g.d_gamma.emplace_back();
            g.d_beta.emplace_back();
        }
    }
    return g;
}

Matrix mlp_forward_eval(const Mlp& mlp, const Matrix& x) {
    Matrix cur = x;
    for (const auto& l : mlp.layers) {
        cur = linear_forward(cur, l);
        if (l.has_bn) cur = batchnorm_eval(cur, l);
        if (l.has_relu) cur = relu(cur);
    }
    return cur;
}

Matrix mlp_forward_train(Mlp& mlp, const Matrix& x, MlpCache& cache, bool update_running) {
    const index_t n = mlp.layers.size();
    cache.inputs.assign(n, Matrix());
    cache.pre_bn.assign(n, Matrix());
    cache.bn.assign(n, BnTrainCache());
    cache.pre_act.assign(n, Matrix());
    Matrix cur = x;
    for (index_t li = 0; li < n; ++li) {
        auto& l = mlp.layers[li];
        cache.inputs[li] = cur;
        cur = linear_forward(cur, l);
        cache.pre_bn[li] = cur;
        if (l.has_bn) cur = batchnorm_train(cur, l, &cache.bn[li], update_running);
        cache.pre_act[li] = cur;
        if (l.has_relu) cur = relu(cur);
    }
    cache.output = cur;
    return cur;
}

Matrix mlp_backward(const Mlp& mlp, const MlpCache& cache, const Matrix& d_out, MlpGrads& grads) {
    Matrix d = d_out;
    for (index_t li = mlp.layers.size(); li-- > 0;) {
        const auto& l = mlp.layers[li];
        if (l.has_relu) d = relu_backward(d, cache.pre_act[li]);
        if (l.has_bn) d = batchnorm_backward(d, l, cache.bn[li], grads.d_gamma[li], grads.d_beta[li]);
        d = linear_backward(d, cache.inputs[li], l, grads.d_weight[li], grads.d_bias[li]);
    }
    return d;
}

index_t trainable_count(const Mlp& mlp) {
    index_t n = 0;
    for (const auto& l : mlp.layers) {
        n += l.weight.size() + l.bias.size();
        if (l.has_bn) n += l.bn_gamma.size() + l.bn_beta.size();
    }
    return n;
}

}  // namespace hmimvc
