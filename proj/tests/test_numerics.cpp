#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "hmimvc/layers.hpp"
#include "hmimvc/mlp.hpp"
#include "hmimvc/rng.hpp"

using namespace hmimvc;

namespace {

Matrix random_matrix(index_t r, index_t c, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Matrix m(r, c);
    for (index_t i = 0; i < m.size(); ++i) m.storage()[i] = rng.uniform(lo, hi);
    return m;
}

}  // namespace

TEST_CASE("gemm against hand-computed products") {
    const Matrix a = Matrix::from_rows({{1, 2, 3}, {4, 5, 6}});
    const Matrix b = Matrix::from_rows({{7, 8}, {9, 10}, {11, 12}});
    const Matrix c = gemm_nn(a, b);
    CHECK(c.rows() == 2);
    CHECK(c.cols() == 2);
    CHECK(c(0, 0) == doctest::Approx(58));
    CHECK(c(0, 1) == doctest::Approx(64));
    CHECK(c(1, 0) == doctest::Approx(139));
    CHECK(c(1, 1) == doctest::Approx(154));

    // A·Bᵀ and Aᵀ·B agree with explicit transposition through gemm_nn.
    Rng rng(7);
    const Matrix x = random_matrix(5, 4, rng);
    const Matrix w = random_matrix(3, 4, rng);
    const Matrix nt = gemm_nt(x, w);
    Matrix wt(4, 3);
    for (index_t i = 0; i < 3; ++i)
        for (index_t j = 0; j < 4; ++j) wt(j, i) = w(i, j);
    const Matrix ref = gemm_nn(x, wt);
    for (index_t i = 0; i < nt.size(); ++i)
        CHECK(nt.storage()[i] == doctest::Approx(ref.storage()[i]).epsilon(1e-12));

    CHECK_THROWS_AS(gemm_nn(a, a), std::invalid_argument);
}

TEST_CASE("linear_forward identity and zero-weight cases") {
    Rng rng(1);
    LayerParams p = make_layer(3, 3, false, false, rng);
    p.weight.fill(0.0);
    for (index_t i = 0; i < 3; ++i) p.weight(i, i) = 1.0;
    p.bias = {0, 0, 0};
    const Matrix x = Matrix::from_rows({{0.5, -1.25, 2.0}, {3.0, 0.0, -7.5}});
    const Matrix y = linear_forward(x, p);
    for (index_t i = 0; i < x.size(); ++i) CHECK(y.storage()[i] == x.storage()[i]);

    p.weight.fill(0.0);
    p.bias = {4.0, -2.0, 0.5};
    const Matrix z = linear_forward(x, p);
    for (index_t i = 0; i < z.rows(); ++i) {
        CHECK(z(i, 0) == 4.0);
        CHECK(z(i, 1) == -2.0);
        CHECK(z(i, 2) == 0.5);
    }
}

TEST_CASE("linear_forward hand product") {
    Rng rng(1);
    LayerParams p = make_layer(2, 2, false, false, rng);
    p.weight = Matrix::from_rows({{1, 1}, {0, 1}});
    p.bias = {0, 0};
    const Matrix y = linear_forward(Matrix::from_rows({{1, 2}}), p);
    CHECK(y(0, 0) == 3.0);
    CHECK(y(0, 1) == 2.0);

    CHECK_THROWS_AS(linear_forward(Matrix(1, 3), p), std::invalid_argument);
}

TEST_CASE("batchnorm two-point symmetry and zero-scale") {
    Rng rng(2);
    LayerParams p = make_layer(1, 1, true, false, rng);
    const Matrix x = Matrix::from_rows({{1}, {3}});
    const Matrix y = batchnorm_forward(x, p, Mode::train);
    CHECK(y(0, 0) == doctest::Approx(-1.0).epsilon(1e-4));
    CHECK(y(1, 0) == doctest::Approx(1.0).epsilon(1e-4));

    p.bn_gamma = {0.0};
    p.bn_beta = {2.5};
    const Matrix z = batchnorm_forward(x, p, Mode::train);
    CHECK(z(0, 0) == 2.5);
    CHECK(z(1, 0) == 2.5);
}

TEST_CASE("batchnorm eval uses running statistics") {
    Rng rng(3);
    LayerParams p = make_layer(1, 2, true, false, rng);
    // running mean 0, var 1, gamma 1, beta 0 by construction
    const Matrix x = Matrix::from_rows({{2.0, -4.0}});
    const Matrix y = batchnorm_forward(x, p, Mode::eval);
    const double scale = 1.0 / std::sqrt(1.0 + kBnEps);
    CHECK(y(0, 0) == doctest::Approx(2.0 * scale).epsilon(1e-14));
    CHECK(y(0, 1) == doctest::Approx(-4.0 * scale).epsilon(1e-14));
}

TEST_CASE("batchnorm train normalizes each feature") {
    Rng rng(4);
    LayerParams p = make_layer(1, 7, true, false, rng);
    // Spread the data so the eps in the denominator is negligible.
    const Matrix x = random_matrix(64, 7, rng, -10.0, 10.0);
    const Matrix y = batchnorm_train(x, p);
    for (index_t j = 0; j < 7; ++j) {
        double mean = 0.0;
        for (index_t i = 0; i < 64; ++i) mean += y(i, j);
        mean /= 64.0;
        CHECK(std::abs(mean) < 1e-10);
        double var = 0.0;
        for (index_t i = 0; i < 64; ++i) var += (y(i, j) - mean) * (y(i, j) - mean);
        var /= 64.0;
        CHECK(std::abs(var - 1.0) < 1e-6);
    }
}

TEST_CASE("batchnorm running stats follow the momentum rule") {
    Rng rng(5);
    LayerParams p = make_layer(1, 1, true, false, rng);
    const Matrix x = Matrix::from_rows({{2}, {6}});  // batch mean 4, biased var 4
    batchnorm_train(x, p);
    CHECK(p.bn_running_mean[0] == doctest::Approx(0.9 * 0.0 + 0.1 * 4.0));
    CHECK(p.bn_running_var[0] == doctest::Approx(0.9 * 1.0 + 0.1 * 4.0));
}

TEST_CASE("batchnorm rejects a train-mode batch of one") {
    Rng rng(6);
    LayerParams p = make_layer(1, 2, true, false, rng);
    CHECK_THROWS_AS(batchnorm_forward(Matrix(1, 2), p, Mode::train), std::invalid_argument);
}

TEST_CASE("relu splits by sign") {
    const Matrix x = Matrix::from_rows({{-1, 2}, {0, -3.5}});
    const Matrix y = relu(x);
    CHECK(y(0, 0) == 0.0);
    CHECK(y(0, 1) == 2.0);
    CHECK(y(1, 0) == 0.0);
    CHECK(y(1, 1) == 0.0);

    Matrix neg(3, 3, -2.0);
    const Matrix z = relu(neg);
    for (double v : z.storage()) CHECK(v == 0.0);
}

TEST_CASE("adam leaves parameters unchanged under zero gradients") {
    Vector params{0.5, -1.5, 3.0};
    const Vector before = params;
    Vector grads(3, 0.0);
    AdamState state;
    for (int i = 0; i < 5; ++i) adam_step(params, grads, state);
    CHECK(params == before);
    CHECK(state.step == 5);
}

TEST_CASE("adam matches the reference recurrence for one step") {
    Vector params{0.0};
    Vector grads{1.0};
    AdamState state;
    state.lr = 1e-3;
    adam_step(params, grads, state);

    // Reference recurrence evaluated by hand.
    const double m = (1.0 - 0.9) * 1.0;
    const double v = (1.0 - 0.999) * 1.0;
    const double m_hat = m / (1.0 - 0.9);
    const double v_hat = v / (1.0 - 0.999);
    const double expected = -1e-3 * m_hat / (std::sqrt(v_hat) + 1e-8);
    CHECK(params[0] == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("adam is deterministic and block-symmetric") {
    Vector a{1.0, 2.0}, b{1.0, 2.0};
    Vector g{0.3, -0.7};
    AdamState sa, sb;
    for (int i = 0; i < 10; ++i) {
        adam_step(a, g, sa);
        adam_step(b, g, sb);
    }
    CHECK(a == b);  // bit-identical
}

TEST_CASE("adam rejects non-finite gradients with the block name") {
    Vector params{1.0};
    Vector grads{std::numeric_limits<double>::quiet_NaN()};
    AdamState state;
    CHECK_THROWS_WITH_AS(adam_step(params, grads, state),
                         doctest::Contains("non-finite gradient"), NumericError);
}

TEST_CASE("grad_check on a quadratic is nearly exact") {
    const auto f = [](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) s += v * v;
        return s;
    };
    const Vector point{0.3, -1.2, 2.5};
    const Vector analytic{0.6, -2.4, 5.0};
    CHECK(grad_check(f, point, analytic, 1e-5) < 1e-8);
}

TEST_CASE("grad_check on a constant reports zero") {
    const auto f = [](std::span<const double>) { return 42.0; };
    const Vector point{1.0, 2.0};
    const Vector analytic{0.0, 0.0};
    CHECK(grad_check(f, point, analytic, 1e-5) == 0.0);
}

TEST_CASE("grad_check validates the step size") {
    const auto f = [](std::span<const double>) { return 0.0; };
    const Vector p{1.0};
    CHECK_THROWS_AS(grad_check(f, p, p, 1e-8), std::invalid_argument);
    CHECK_THROWS_AS(grad_check(f, p, p, 1e-2), std::invalid_argument);
}

// Finite-difference checks of each backward primitive. The loss is the
// squared sum of the layer output so second-order terms exercise the
// whole Jacobian.
namespace {

double squared_sum(const Matrix& m) {
    double s = 0.0;
    for (double v : m.storage()) s += v * v;
    return s;
}

}  // namespace

TEST_CASE("linear backward matches finite differences") {
    Rng rng(11);
    const index_t b = 4, in = 5, out = 3;
    const Matrix x0 = random_matrix(b, in, rng);
    LayerParams p0 = make_layer(in, out, false, false, rng);
    for (double& v : p0.bias) v = rng.uniform(-0.5, 0.5);

    // Pack (x, W, b) into one flat point.
    Vector point;
    auto pack = [&](const Matrix& x, const LayerParams& p) {
        Vector flat(x.storage());
        flat.insert(flat.end(), p.weight.storage().begin(), p.weight.storage().end());
        flat.insert(flat.end(), p.bias.begin(), p.bias.end());
        return flat;
    };
    point = pack(x0, p0);
    const auto f = [&](std::span<const double> flat) {
        Matrix x = x0;
        LayerParams p = p0;
        std::copy_n(flat.begin(), x.size(), x.storage().begin());
        std::copy_n(flat.begin() + x.size(), p.weight.size(), p.weight.storage().begin());
        std::copy_n(flat.begin() + x.size() + p.weight.size(), p.bias.size(), p.bias.begin());
        return squared_sum(linear_forward(x, p));
    };

    const Matrix y = linear_forward(x0, p0);
    Matrix d_y = y;
    for (double& v : d_y.storage()) v *= 2.0;
    Matrix d_w;
    Vector d_b;
    const Matrix d_x = linear_backward(d_y, x0, p0, d_w, d_b);
    Vector analytic(d_x.storage());
    analytic.insert(analytic.end(), d_w.storage().begin(), d_w.storage().end());
    analytic.insert(analytic.end(), d_b.begin(), d_b.end());

    CHECK(grad_check(f, point, analytic, 1e-5) < 1e-9);
}

TEST_CASE("batchnorm backward matches finite differences") {
    Rng rng(12);
    const index_t b = 6, f_dim = 4;
    const Matrix x0 = random_matrix(b, f_dim, rng, -2.0, 2.0);
    LayerParams p0 = make_layer(f_dim, f_dim, true, false, rng);
    for (double& v : p0.bn_gamma) v = rng.uniform(0.5, 1.5);
    for (double& v : p0.bn_beta) v = rng.uniform(-0.5, 0.5);

    Vector point(x0.storage());
    point.insert(point.end(), p0.bn_gamma.begin(), p0.bn_gamma.end());
    point.insert(point.end(), p0.bn_beta.begin(), p0.bn_beta.end());
    const auto f = [&](std::span<const double> flat) {
        Matrix x = x0;
        LayerParams p = p0;
        std::copy_n(flat.begin(), x.size(), x.storage().begin());
        std::copy_n(flat.begin() + x.size(), f_dim, p.bn_gamma.begin());
        std::copy_n(flat.begin() + x.size() + f_dim, f_dim, p.bn_beta.begin());
        return squared_sum(batchnorm_train(x, p, nullptr, false));
    };

    BnTrainCache cache;
    LayerParams p_run = p0;
    const Matrix y = batchnorm_train(x0, p_run, &cache, false);
    Matrix d_y = y;
    for (double& v : d_y.storage()) v *= 2.0;
    Vector d_gamma, d_beta;
    const Matrix d_x = batchnorm_backward(d_y, p0, cache, d_gamma, d_beta);
    Vector analytic(d_x.storage());
    analytic.insert(analytic.end(), d_gamma.begin(), d_gamma.end());
    analytic.insert(analytic.end(), d_beta.begin(), d_beta.end());

    CHECK(grad_check(f, point, analytic, 1e-5) < 1e-6);
}

TEST_CASE("relu backward matches finite differences away from kinks") {
    Rng rng(13);
    Matrix x0 = random_matrix(5, 5, rng, -2.0, 2.0);
    for (double& v : x0.storage())
        if (std::abs(v) < 0.05) v = 0.1;  // keep clear of the kink for the FD probe

    Vector point(x0.storage());
    const auto f = [&](std::span<const double> flat) {
        Matrix x = x0;
        std::copy_n(flat.begin(), x.size(), x.storage().begin());
        return squared_sum(relu(x));
    };
    const Matrix y = relu(x0);
    Matrix d_y = y;
    for (double& v : d_y.storage()) v *= 2.0;
    const Matrix d_x = relu_backward(d_y, x0);
    CHECK(grad_check(f, point, Vector(d_x.storage()), 1e-5) < 1e-9);
}

TEST_CASE("mlp stack composition keeps shapes") {
    Rng rng(14);
    Mlp mlp = make_mlp(20, {32, 16}, 10, rng);
    CHECK(mlp.in_dim() == 20);
    CHECK(mlp.out_dim() == 10);
    CHECK(mlp.layers.size() == 3);
    CHECK(mlp.layers[0].has_bn);
    CHECK(mlp.layers[0].has_relu);
    CHECK_FALSE(mlp.layers[2].has_bn);
    CHECK_FALSE(mlp.layers[2].has_relu);

    const Matrix x = random_matrix(8, 20, rng);
    const Matrix y_eval = mlp_forward_eval(mlp, x);
    CHECK(y_eval.rows() == 8);
    CHECK(y_eval.cols() == 10);
    MlpCache cache;
    const Matrix y_train = mlp_forward_train(mlp, x, cache);
    CHECK(y_train.rows() == 8);
    CHECK(y_train.cols() == 10);
}

TEST_CASE("mlp backward matches finite differences through the whole stack") {
    Rng rng(15);
    Mlp mlp = make_mlp(4, {8}, 3, rng);
    const Matrix x = random_matrix(5, 4, rng);

    Vector point;
    visit_trainable(mlp, "mlp", [&](const std::string&, const Vector& blockv) {
        point.insert(point.end(), blockv.begin(), blockv.end());
    });
    const auto f = [&](std::span<const double> flat) {
        Mlp m = mlp;
        index_t off = 0;
        visit_trainable(m, "mlp", [&](const std::string&, Vector& blockv) {
            std::copy_n(flat.begin() + off, blockv.size(), blockv.begin());
            off += blockv.size();
        });
        MlpCache cache;
        return squared_sum(mlp_forward_train(m, x, cache, false));
    };

    Mlp work = mlp;
    MlpCache cache;
    const Matrix y = mlp_forward_train(work, x, cache, false);
    Matrix d_y = y;
    for (double& v : d_y.storage()) v *= 2.0;
    MlpGrads grads = make_grads(mlp);
    mlp_backward(mlp, cache, d_y, grads);
    Vector analytic;
    visit_mlp_grads(grads, [&](const Vector& g) {
        analytic.insert(analytic.end(), g.begin(), g.end());
    });

    CHECK(grad_check(f, point, analytic, 1e-5) < 1e-5);
}

TEST_CASE("he initialization has the expected weight variance") {
    Rng rng(16);
    const LayerParams p = make_layer(256, 256, true, true, rng);
    double mean = 0.0;
    for (double v : p.weight.storage()) mean += v;
    mean /= static_cast<double>(p.weight.size());
    double var = 0.0;
    for (double v : p.weight.storage()) var += (v - mean) * (v - mean);
    var /= static_cast<double>(p.weight.size());
    const double target = 2.0 / 256.0;
    CHECK(var > 0.8 * target);
    CHECK(var < 1.2 * target);
}
