#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tutor/error.hpp"
#include "tutor/net.hpp"

using namespace tutor;

namespace {

DenseNet make_net(std::vector<std::size_t> sizes, OutputHead head, double dropout,
                  std::uint64_t seed) {
    DenseNetSpec spec{std::move(sizes), head, dropout};
    Rng rng(seed);
    return DenseNet::init(spec, rng);
}

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0,
                     double hi = 1.0) {
    Matrix m(rows, cols);
    for (double& x : m.data()) x = rng.uniform(lo, hi);
    return m;
}

Matrix one_hot(const std::vector<int>& labels, std::size_t n_classes) {
    Matrix t(labels.size(), n_classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        t.at(i, static_cast<std::size_t>(labels[i])) = 1.0;
    }
    return t;
}

double max_rel_error(const Gradients& a, const Gradients& b) {
    double worst = 0.0;
    auto cmp = [&](double x, double y) {
        const double rel = std::abs(x - y) / std::max(1e-6, std::abs(y));
        worst = std::max(worst, rel);
    };
    for (std::size_t k = 0; k < a.weights.size(); ++k) {
        for (std::size_t i = 0; i < a.weights[k].size(); ++i) {
            cmp(a.weights[k].data()[i], b.weights[k].data()[i]);
        }
        for (std::size_t j = 0; j < a.biases[k].size(); ++j) {
            cmp(a.biases[k][j], b.biases[k][j]);
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("zero net with softmax head spreads mass uniformly") {
    for (std::size_t c : {2, 3, 7}) {
        DenseNet net = make_net({3, 4, c}, OutputHead::Softmax, 0.0, 1);
        for (auto& w : net.weights) w.scale(0.0);
        Matrix x(5, 3, 0.7);
        const Matrix out = predict(net, x);
        for (std::size_t i = 0; i < out.rows(); ++i) {
            for (std::size_t j = 0; j < c; ++j) {
                CHECK(out.at(i, j) == doctest::Approx(1.0 / static_cast<double>(c)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("dropout rate zero: train and eval modes coincide") {
    DenseNet net = make_net({4, 6, 3}, OutputHead::Softmax, 0.0, 2);
    Rng data_rng(3);
    Matrix x = random_matrix(7, 4, data_rng);
    Rng rng_a(11), rng_b(12);  // different streams must not matter
    const Matrix train_out = forward(net, x, true, rng_a).output();
    const Matrix eval_out = forward(net, x, false, rng_b).output();
    for (std::size_t i = 0; i < train_out.size(); ++i) {
        CHECK(train_out.data()[i] == eval_out.data()[i]);
    }
}

TEST_CASE("hand-evaluated 2-2-2 relu+softmax chain") {
    DenseNet net = make_net({2, 2, 2}, OutputHead::Softmax, 0.0, 4);
    net.weights[0].data() = {1.0, -1.0, 0.5, 2.0};
    net.biases[0] = {0.1, -0.2};
    net.weights[1].data() = {1.0, 0.0, -1.0, 1.0};
    net.biases[1] = {0.0, 0.5};
    Matrix x(1, 2);
    x.data() = {1.0, 2.0};
    // Hidden: relu([1+1+0.1, -1+4-0.2]) = [2.1, 2.8]
    // Logits: [2.1-2.8, 2.8+0.5] = [-0.7, 3.3]; softmax gap 4.0.
    const Matrix out = predict(net, x);
    CHECK(out.at(0, 0) == doctest::Approx(0.01798620996209156).epsilon(1e-12));
    CHECK(out.at(0, 1) == doctest::Approx(0.98201379003790845).epsilon(1e-12));

    Rng rng(0);
    ForwardResult fwd = forward(net, x, false, rng);
    CHECK(fwd.layer_outputs[1].at(0, 0) == doctest::Approx(2.1).epsilon(1e-12));
    CHECK(fwd.layer_outputs[1].at(0, 1) == doctest::Approx(2.8).epsilon(1e-12));
}

TEST_CASE("forward rejects mismatched input width") {
    DenseNet net = make_net({3, 4, 2}, OutputHead::Softmax, 0.0, 5);
    Matrix x(2, 4);
    Rng rng(0);
    CHECK_THROWS_AS(forward(net, x, false, rng), DimensionError);
}

TEST_CASE("net specs without a hidden layer or with bad dropout are rejected") {
    Rng rng(0);
    CHECK_THROWS_AS(DenseNet::init(DenseNetSpec{{4, 2}, OutputHead::Softmax, 0.0}, rng),
                    ConfigError);
    CHECK_THROWS_AS(DenseNet::init(DenseNetSpec{{4, 0, 2}, OutputHead::Softmax, 0.0}, rng),
                    ConfigError);
    CHECK_THROWS_AS(DenseNet::init(DenseNetSpec{{4, 3, 2}, OutputHead::Softmax, 1.0}, rng),
                    ConfigError);
}

TEST_CASE("sgd rejects gradients of the wrong shape") {
    DenseNet net = make_net({2, 3, 2}, OutputHead::Softmax, 0.0, 30);
    DenseNet other = make_net({2, 4, 2}, OutputHead::Softmax, 0.0, 31);
    SgdMomentum opt = SgdMomentum::create(net, 0.1, 0.0);
    Gradients wrong = Gradients::zeros_like(other);
    CHECK_THROWS_AS(sgd_step(opt, net, wrong), DimensionError);
}

TEST_CASE("softmax rows sum to one for extreme logits") {
    DenseNet net = make_net({5, 8, 4}, OutputHead::Softmax, 0.0, 6);
    Rng rng(7);
    Matrix x = random_matrix(20, 5, rng, -1000.0, 1000.0);
    ForwardResult fwd = forward(net, x, false, rng);
    for (std::size_t i = 0; i < fwd.output().rows(); ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < fwd.output().cols(); ++j) sum += fwd.output().at(i, j);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        for (std::size_t j = 0; j < fwd.output().cols(); ++j) {
            CHECK(std::isfinite(fwd.output().at(i, j)));
        }
    }
    // Loss and gradients must stay finite as well.
    Matrix targets = one_hot({0, 1, 2, 3, 0, 1, 2, 3, 0, 1, 2, 3, 0, 1, 2, 3, 0, 1, 2, 3}, 4);
    const double loss = compute_loss(net, fwd, targets, Loss::CrossEntropy);
    CHECK(std::isfinite(loss));
    Gradients grads = backward(net, fwd, targets, Loss::CrossEntropy);
    CHECK(grads.all_finite());
}

TEST_CASE("perfect prediction yields zero gradients everywhere") {
    DenseNet net = make_net({3, 5, 4}, OutputHead::Softmax, 0.0, 8);
    Rng rng(9);
    Matrix x = random_matrix(6, 3, rng);
    ForwardResult fwd = forward(net, x, false, rng);
    const Matrix targets = fwd.output();  // probabilities equal targets exactly
    Gradients grads = backward(net, fwd, targets, Loss::CrossEntropy);
    for (const auto& w : grads.weights) {
        for (double g : w.data()) CHECK(g == 0.0);
    }
    for (const auto& b : grads.biases) {
        for (double g : b) CHECK(g == 0.0);
    }
}

TEST_CASE("backward matches central finite differences") {
    Rng rng(10);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t hidden = 2 + trial % 3;
        DenseNet net = make_net({3, hidden, hidden, 3}, OutputHead::Softmax, 0.0,
                                100 + static_cast<std::uint64_t>(trial));
        for (auto& w : net.weights) {
            for (double& v : w.data()) v = rng.uniform(-1.0, 1.0);
        }
        for (auto& b : net.biases) {
            for (double& v : b) v = rng.uniform(-1.0, 1.0);
        }
        const std::size_t batch = 1 + trial % 4;
        Matrix x = random_matrix(batch, 3, rng);
        std::vector<int> labels;
        for (std::size_t i = 0; i < batch; ++i) {
            labels.push_back(static_cast<int>(rng.uniform_index(3)));
        }
        Matrix targets = one_hot(labels, 3);
        ForwardResult fwd = forward(net, x, false, rng);
        Gradients analytic = backward(net, fwd, targets, Loss::CrossEntropy);
        Gradients numeric = finite_diff_grad(net, x, targets, Loss::CrossEntropy, 1e-5);
        CHECK(max_rel_error(analytic, numeric) < 1e-4);
    }
}

TEST_CASE("duplicating the batch leaves mean gradients unchanged") {
    DenseNet net = make_net({4, 6, 3}, OutputHead::Softmax, 0.0, 11);
    Rng rng(12);
    Matrix x = random_matrix(5, 4, rng);
    Matrix targets = one_hot({0, 1, 2, 0, 1}, 3);
    Matrix x2(10, 4);
    Matrix t2(10, 3);
    for (std::size_t i = 0; i < 10; ++i) {
        std::copy(x.row_ptr(i % 5), x.row_ptr(i % 5) + 4, x2.row_ptr(i));
        std::copy(targets.row_ptr(i % 5), targets.row_ptr(i % 5) + 3, t2.row_ptr(i));
    }
    Gradients g1 = backward(net, forward(net, x, false, rng), targets, Loss::CrossEntropy);
    Gradients g2 = backward(net, forward(net, x2, false, rng), t2, Loss::CrossEntropy);
    CHECK(max_rel_error(g1, g2) < 1e-12);
}

TEST_CASE("backward rejects mismatched batch sizes") {
    DenseNet net = make_net({3, 4, 2}, OutputHead::Softmax, 0.0, 13);
    Rng rng(14);
    Matrix x = random_matrix(4, 3, rng);
    ForwardResult fwd = forward(net, x, false, rng);
    Matrix bad_targets(3, 2);
    CHECK_THROWS_AS(backward(net, fwd, bad_targets, Loss::CrossEntropy), DimensionError);
}

TEST_CASE("sgd with momentum zero and unit lr subtracts the gradient exactly") {
    DenseNet net = make_net({2, 3, 2}, OutputHead::Softmax, 0.0, 15);
    DenseNet before = net;
    SgdMomentum opt = SgdMomentum::create(net, 1.0, 0.0);
    Gradients g = Gradients::zeros_like(net);
    Rng rng(16);
    for (auto& w : g.weights) {
        for (double& v : w.data()) v = rng.uniform(-0.5, 0.5);
    }
    sgd_step(opt, net, g);
    for (std::size_t k = 0; k < net.weights.size(); ++k) {
        for (std::size_t i = 0; i < net.weights[k].size(); ++i) {
            CHECK(net.weights[k].data()[i] == before.weights[k].data()[i] - g.weights[k].data()[i]);
        }
    }
}

TEST_CASE("zero gradient leaves parameters untouched") {
    DenseNet net = make_net({2, 3, 2}, OutputHead::Softmax, 0.0, 17);
    DenseNet before = net;
    SgdMomentum opt = SgdMomentum::create(net, 0.1, 0.9);
    Gradients g = Gradients::zeros_like(net);
    sgd_step(opt, net, g);
    sgd_step(opt, net, g);
    for (std::size_t k = 0; k < net.weights.size(); ++k) {
        CHECK(net.weights[k].data() == before.weights[k].data());
    }
}

TEST_CASE("momentum velocity follows the hand-unrolled recurrence") {
    // v1 = g, v2 = 0.9 g + g = 1.9 g, so the second delta is lr * 1.9 * g.
    DenseNet net = make_net({2, 2, 2}, OutputHead::Softmax, 0.0, 18);
    const double lr = 0.05;
    SgdMomentum opt = SgdMomentum::create(net, lr, 0.9);
    Gradients g = Gradients::zeros_like(net);
    for (auto& w : g.weights) {
        for (double& v : w.data()) v = 0.3;
    }
    DenseNet after_one = net;
    SgdMomentum opt_copy = opt;
    sgd_step(opt_copy, after_one, g);
    DenseNet after_two = after_one;
    sgd_step(opt_copy, after_two, g);
    for (std::size_t k = 0; k < net.weights.size(); ++k) {
        for (std::size_t i = 0; i < net.weights[k].size(); ++i) {
            const double second_delta =
                after_one.weights[k].data()[i] - after_two.weights[k].data()[i];
            CHECK(second_delta == doctest::Approx(lr * 1.9 * 0.3).epsilon(1e-12));
        }
    }
}

TEST_CASE("non-finite gradients abort the step") {
    DenseNet net = make_net({2, 3, 2}, OutputHead::Softmax, 0.0, 19);
    DenseNet before = net;
    SgdMomentum opt = SgdMomentum::create(net, 0.1, 0.0);
    Gradients g = Gradients::zeros_like(net);
    g.weights[0].at(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(sgd_step(opt, net, g), NumericError);
    for (std::size_t k = 0; k < net.weights.size(); ++k) {
        CHECK(net.weights[k].data() == before.weights[k].data());
    }
}

TEST_CASE("finite differences reproduce a hand-derived quadratic") {
    // Single path net in the relu-positive regime:
    //   h = relu(0.5 * 2 + 0.25) = 1.25, y = 2 h - 1 = 1.5, t = 3
    //   L = (y - t)^2 -> dL/dw1 = -3.75, dL/db1 = -3, dL/dw0 = -12, dL/db0 = -6
    DenseNet net = make_net({1, 1, 1}, OutputHead::Linear, 0.0, 20);
    net.weights[0].data() = {0.5};
    net.biases[0] = {0.25};
    net.weights[1].data() = {2.0};
    net.biases[1] = {-1.0};
    Matrix x(1, 1);
    x.data() = {2.0};
    Matrix t(1, 1);
    t.data() = {3.0};
    Gradients fd = finite_diff_grad(net, x, t, Loss::Mse, 1e-5);
    CHECK(fd.weights[1].at(0, 0) == doctest::Approx(-3.75).epsilon(1e-8));
    CHECK(fd.biases[1][0] == doctest::Approx(-3.0).epsilon(1e-8));
    CHECK(fd.weights[0].at(0, 0) == doctest::Approx(-12.0).epsilon(1e-8));
    CHECK(fd.biases[0][0] == doctest::Approx(-6.0).epsilon(1e-8));
}

TEST_CASE("central difference error shrinks quadratically in epsilon") {
    DenseNet net = make_net({2, 3, 2}, OutputHead::Tanh, 0.0, 21);
    Rng rng(22);
    Matrix x = random_matrix(3, 2, rng);
    Matrix t = random_matrix(3, 2, rng, -0.5, 0.5);
    ForwardResult fwd = forward(net, x, false, rng);
    Gradients analytic = backward(net, fwd, t, Loss::Mse);

    auto total_abs_err = [&](double eps) {
        Gradients fd = finite_diff_grad(net, x, t, Loss::Mse, eps);
        double err = 0.0;
        for (std::size_t k = 0; k < fd.weights.size(); ++k) {
            for (std::size_t i = 0; i < fd.weights[k].size(); ++i) {
                err += std::abs(fd.weights[k].data()[i] - analytic.weights[k].data()[i]);
            }
        }
        return err;
    };
    const double coarse = total_abs_err(1e-3);
    const double fine = total_abs_err(5e-4);
    CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.25));
}

TEST_CASE("oracle cross-check on a softmax net") {
    DenseNet net = make_net({4, 5, 3}, OutputHead::Softmax, 0.0, 23);
    Rng rng(24);
    Matrix x = random_matrix(4, 4, rng);
    Matrix targets = one_hot({0, 2, 1, 0}, 3);
    ForwardResult fwd = forward(net, x, false, rng);
    Gradients analytic = backward(net, fwd, targets, Loss::CrossEntropy);
    Gradients numeric = finite_diff_grad(net, x, targets, Loss::CrossEntropy, 1e-5);
    CHECK(max_rel_error(analytic, numeric) < 1e-4);
}

TEST_CASE("finite_diff_grad rejects non-positive epsilon") {
    DenseNet net = make_net({2, 2, 2}, OutputHead::Softmax, 0.0, 25);
    Matrix x(1, 2), t(1, 2);
    t.at(0, 0) = 1.0;
    CHECK_THROWS_AS(finite_diff_grad(net, x, t, Loss::CrossEntropy, 0.0), PreconditionError);
}

TEST_CASE("forward with dropout is deterministic given the seed") {
    DenseNet net = make_net({4, 8, 8, 3}, OutputHead::Softmax, 0.3, 26);
    Rng data_rng(27);
    Matrix x = random_matrix(5, 4, data_rng);
    Rng rng_a(99), rng_b(99);
    const Matrix out_a = forward(net, x, true, rng_a).output();
    const Matrix out_b = forward(net, x, true, rng_b).output();
    CHECK(out_a.data() == out_b.data());
    // And dropout gradients agree with finite differences when the masks are
    // fixed by re-seeding.
    Rng rng_c(99);
    ForwardResult fwd = forward(net, x, true, rng_c);
    Matrix targets = one_hot({0, 1, 2, 0, 1}, 3);
    Gradients analytic = backward(net, fwd, targets, Loss::CrossEntropy);
    CHECK(analytic.all_finite());
}

TEST_CASE("dropout scales kept activations by 1/(1-p) in expectation") {
    DenseNet net = make_net({3, 200, 2}, OutputHead::Linear, 0.5, 28);
    for (auto& w : net.weights) w.scale(0.0);
    for (double& b : net.biases[0]) b = 1.0;  // hidden activations all 1 pre-dropout
    net.weights[1] = Matrix(200, 2, 1.0);     // output sums the hidden layer
    Matrix x(1, 3, 0.0);
    Rng rng(29);
    double total = 0.0;
    const int rounds = 200;
    for (int r = 0; r < rounds; ++r) {
        total += forward(net, x, true, rng).output().at(0, 0);
    }
    // Inverted scaling keeps the expected sum at 200.
    CHECK(total / rounds == doctest::Approx(200.0).epsilon(0.05));
}
