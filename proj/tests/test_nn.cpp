#include <doctest.h>

#include <cmath>
#include <vector>

#include "amber/errors.hpp"
#include "amber/nn.hpp"
#include "amber/rng.hpp"

using namespace amber;

namespace {

Matrix make(std::size_t r, std::size_t c, std::initializer_list<double> vals) {
    Matrix m(r, c);
    std::copy(vals.begin(), vals.end(), m.v.begin());
    return m;
}

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Matrix m(r, c);
    for (double& x : m.v) x = rng.uniform(lo, hi);
    return m;
}

// central finite differences over every parameter of the network
void check_gradients_fd(NetworkParams net, const Matrix& x, const Targets& t, Loss loss,
                        double h = 1e-5, double tol = 1e-4) {
    Gradients g = gradients(net, x, t, loss);
    auto loss_at = [&]() { return loss_value(forward(net, x), t, loss); };
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        for (std::size_t i = 0; i < net.weights[l].v.size(); ++i) {
            double saved = net.weights[l].v[i];
            net.weights[l].v[i] = saved + h;
            double up = loss_at();
            net.weights[l].v[i] = saved - h;
            double down = loss_at();
            net.weights[l].v[i] = saved;
            double fd = (up - down) / (2.0 * h);
            double analytic = g.weights[l].v[i];
            double err = std::abs(fd - analytic);
            CHECK(err <= tol * std::max({std::abs(fd), std::abs(analytic), 1.0}));
        }
        for (std::size_t i = 0; i < net.biases[l].size(); ++i) {
            double saved = net.biases[l][i];
            net.biases[l][i] = saved + h;
            double up = loss_at();
            net.biases[l][i] = saved - h;
            double down = loss_at();
            net.biases[l][i] = saved;
            double fd = (up - down) / (2.0 * h);
            double analytic = g.biases[l][i];
            double err = std::abs(fd - analytic);
            CHECK(err <= tol * std::max({std::abs(fd), std::abs(analytic), 1.0}));
        }
    }
}

}  // namespace

TEST_CASE("init_network is deterministic for a fixed seed") {
    std::vector<LayerSpec> specs = {{2, 3, Activation::Relu}};
    NetworkParams a = init_network(specs, 7);
    NetworkParams b = init_network(specs, 7);
    CHECK(a == b);
    NetworkParams c = init_network(specs, 8);
    CHECK_FALSE(a == c);
}

TEST_CASE("init_network rejects a broken dimension chain") {
    std::vector<LayerSpec> specs = {{2, 3, Activation::Relu}, {4, 1, Activation::Sigmoid}};
    CHECK_THROWS_AS(init_network(specs, 1), ConfigError);
    CHECK_THROWS_AS(init_network({}, 1), ConfigError);
}

TEST_CASE("init_network respects the fan-based uniform bound") {
    double bound = std::sqrt(6.0 / (2 + 2));
    for (std::uint64_t seed : {1, 2, 3, 99}) {
        NetworkParams net = init_network({{2, 2, Activation::Linear}}, seed);
        for (double w : net.weights[0].v) CHECK(std::abs(w) <= bound);
        for (double b : net.biases[0]) CHECK(b == 0.0);
    }
}

TEST_CASE("init_network rejects softmax on a hidden layer") {
    std::vector<LayerSpec> specs = {{2, 3, Activation::Softmax}, {3, 2, Activation::Softmax}};
    CHECK_THROWS_AS(init_network(specs, 1), ConfigError);
}

TEST_CASE("forward: identity linear network reproduces its input") {
    NetworkParams net = init_network({{2, 2, Activation::Linear}}, 0);
    net.weights[0] = make(2, 2, {1, 0, 0, 1});
    net.biases[0] = {0, 0};
    Matrix out = forward(net, make(1, 2, {1, 2}));
    CHECK(out(0, 0) == doctest::Approx(1.0));
    CHECK(out(0, 1) == doctest::Approx(2.0));
}

TEST_CASE("forward: hand-computed affine layer") {
    NetworkParams net = init_network({{2, 2, Activation::Linear}}, 0);
    net.weights[0] = make(2, 2, {2, 0, 0, 3});
    net.biases[0] = {1, 1};
    Matrix out = forward(net, make(1, 2, {1, 1}));
    CHECK(out(0, 0) == doctest::Approx(3.0));
    CHECK(out(0, 1) == doctest::Approx(4.0));
}

TEST_CASE("forward: softmax rows are normalized and non-negative") {
    Rng rng(5);
    NetworkParams net = init_network({{4, 6, Activation::Relu}, {6, 5, Activation::Softmax}}, 11);
    Matrix x = random_matrix(20, 4, rng, -3.0, 3.0);
    Matrix out = forward(net, x);
    for (std::size_t i = 0; i < out.rows; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < out.cols; ++j) {
            CHECK(out(i, j) >= 0.0);
            sum += out(i, j);
        }
        CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
}

TEST_CASE("forward rejects width mismatch") {
    NetworkParams net = init_network({{3, 2, Activation::Linear}}, 0);
    CHECK_THROWS_AS(forward(net, Matrix(1, 2)), ShapeError);
}

TEST_CASE("loss_value: zero mse when outputs equal targets") {
    Matrix out = make(2, 2, {1, 2, 3, 4});
    CHECK(loss_value(out, out, Loss::Mse) == 0.0);
}

TEST_CASE("loss_value: near-zero cross-entropy for a perfect prediction") {
    Matrix out = make(1, 3, {1.0, 0.0, 0.0});
    std::vector<int> y = {0};
    CHECK(loss_value(out, y, Loss::CrossEntropy) <= 1e-11);
}

TEST_CASE("loss_value: uniform 10-class output gives ln 10") {
    Matrix out(4, 10);
    for (double& x : out.v) x = 0.1;
    std::vector<int> y = {0, 3, 7, 9};
    CHECK(loss_value(out, y, Loss::CrossEntropy) == doctest::Approx(std::log(10.0)).epsilon(1e-9));
}

TEST_CASE("loss_value rejects out-of-range labels") {
    Matrix out(2, 3);
    std::vector<int> y = {0, 5};
    CHECK_THROWS_AS(loss_value(out, y, Loss::CrossEntropy), DataError);
}

TEST_CASE("gradients match central finite differences on random small networks") {
    Rng rng(123);
    SUBCASE("cross-entropy with softmax head") {
        for (std::uint64_t seed : {1, 2, 3}) {
            NetworkParams net = init_network(
                {{5, 7, Activation::Relu}, {7, 6, Activation::Sigmoid}, {6, 4, Activation::Softmax}},
                seed);
            Matrix x = random_matrix(9, 5, rng);
            std::vector<int> y = {0, 1, 2, 3, 0, 1, 2, 3, 1};
            check_gradients_fd(net, x, Targets::of(y), Loss::CrossEntropy);
        }
    }
    SUBCASE("binary cross-entropy with sigmoid head") {
        for (std::uint64_t seed : {4, 5, 6}) {
            NetworkParams net = init_network(
                {{4, 8, Activation::Relu}, {8, 3, Activation::Relu}, {3, 1, Activation::Sigmoid}},
                seed);
            Matrix x = random_matrix(8, 4, rng);
            std::vector<int> y = {0, 1, 1, 0, 1, 0, 0, 1};
            check_gradients_fd(net, x, Targets::of(y), Loss::BinaryCrossEntropy);
        }
    }
    SUBCASE("mse with linear head") {
        for (std::uint64_t seed : {7, 8}) {
            NetworkParams net = init_network(
                {{3, 6, Activation::Sigmoid}, {6, 5, Activation::Relu}, {5, 2, Activation::Linear}},
                seed);
            Matrix x = random_matrix(7, 3, rng);
            Matrix t = random_matrix(7, 2, rng);
            check_gradients_fd(net, x, Targets::of(t), Loss::Mse);
        }
    }
    SUBCASE("mse with sigmoid head") {
        NetworkParams net = init_network({{3, 4, Activation::Relu}, {4, 2, Activation::Sigmoid}}, 9);
        Matrix x = random_matrix(6, 3, rng);
        Matrix t = random_matrix(6, 2, rng, 0.0, 1.0);
        check_gradients_fd(net, x, Targets::of(t), Loss::Mse);
    }
    SUBCASE("mse with softmax head") {
        NetworkParams net = init_network({{3, 5, Activation::Relu}, {5, 3, Activation::Softmax}}, 10);
        Matrix x = random_matrix(6, 3, rng);
        Matrix t = random_matrix(6, 3, rng, 0.0, 1.0);
        check_gradients_fd(net, x, Targets::of(t), Loss::Mse);
    }
}

TEST_CASE("gradients: zero input with zero biases kills first-layer weight gradients") {
    NetworkParams net = init_network({{4, 5, Activation::Relu}, {5, 2, Activation::Softmax}}, 3);
    for (auto& b : net.biases) std::fill(b.begin(), b.end(), 0.0);
    Matrix x(6, 4);  // all zeros
    std::vector<int> y = {0, 1, 0, 1, 0, 1};
    Gradients g = gradients(net, x, Targets::of(y), Loss::CrossEntropy);
    for (double w : g.weights[0].v) CHECK(w == 0.0);
}

TEST_CASE("gradients: duplicating an example leaves the mean gradient unchanged") {
    Rng rng(77);
    NetworkParams net = init_network({{3, 4, Activation::Relu}, {4, 2, Activation::Softmax}}, 21);
    Matrix x = random_matrix(2, 3, rng);
    std::vector<int> y = {0, 1};
    Matrix x2(4, 3);
    std::vector<int> y2 = {0, 1, 0, 1};
    for (std::size_t i = 0; i < 4; ++i)
        std::copy(x.row(i % 2), x.row(i % 2) + 3, x2.row(i));
    Gradients a = gradients(net, x, Targets::of(y), Loss::CrossEntropy);
    Gradients b = gradients(net, x2, Targets::of(y2), Loss::CrossEntropy);
    for (std::size_t l = 0; l < a.weights.size(); ++l)
        for (std::size_t i = 0; i < a.weights[l].v.size(); ++i)
            CHECK(a.weights[l].v[i] == doctest::Approx(b.weights[l].v[i]).epsilon(1e-12));
}

TEST_CASE("train: XOR is learned to 4/4 accuracy") {
    Matrix x = make(4, 2, {0, 0, 0, 1, 1, 0, 1, 1});
    std::vector<int> y = {0, 1, 1, 0};
    NetworkParams net = init_network(
        {{2, 4, Activation::Sigmoid}, {4, 1, Activation::Sigmoid}}, 42);
    TrainConfig cfg;
    cfg.loss = Loss::BinaryCrossEntropy;
    cfg.learning_rate = 1.0;
    cfg.batch_size = 4;
    cfg.max_epochs = 6000;
    cfg.patience = 0;
    cfg.validation_fraction = 0.0;
    cfg.seed = 11;
    auto [trained, report] = train(net, x, y, cfg);
    CHECK(evaluate_accuracy(trained, x, y) == 1.0);
}

TEST_CASE("train: max_epochs 0 returns the input network bitwise") {
    NetworkParams net = init_network({{2, 3, Activation::Relu}, {3, 1, Activation::Sigmoid}}, 1);
    Matrix x = make(2, 2, {0, 1, 1, 0});
    std::vector<int> y = {0, 1};
    TrainConfig cfg;
    cfg.loss = Loss::BinaryCrossEntropy;
    cfg.max_epochs = 0;
    cfg.validation_fraction = 0.0;
    auto [out, report] = train(net, x, y, cfg);
    CHECK(out == net);
    CHECK(report.epochs_run == 0);
}

TEST_CASE("train: identical seeds give identical loss curves and parameters") {
    Rng rng(9);
    Matrix x = random_matrix(40, 3, rng);
    std::vector<int> y;
    for (std::size_t i = 0; i < 40; ++i) y.push_back(x(i, 0) > 0 ? 1 : 0);
    NetworkParams net = init_network({{3, 5, Activation::Relu}, {5, 1, Activation::Sigmoid}}, 2);
    TrainConfig cfg;
    cfg.loss = Loss::BinaryCrossEntropy;
    cfg.max_epochs = 30;
    cfg.patience = 3;
    cfg.validation_fraction = 0.2;
    cfg.seed = 17;
    auto [a, ra] = train(net, x, y, cfg);
    auto [b, rb] = train(net, x, y, cfg);
    CHECK(a == b);
    CHECK(ra.train_loss == rb.train_loss);
    CHECK(ra.val_loss == rb.val_loss);
    CHECK(ra.best_epoch == rb.best_epoch);
}

TEST_CASE("train: early stopping obeys patience and best-epoch invariants") {
    Rng rng(31);
    Matrix x = random_matrix(60, 4, rng);
    std::vector<int> y;
    for (std::size_t i = 0; i < 60; ++i) y.push_back(rng.below(2) ? 1 : 0);  // noise labels
    NetworkParams net = init_network({{4, 6, Activation::Relu}, {6, 1, Activation::Sigmoid}}, 5);
    TrainConfig cfg;
    cfg.loss = Loss::BinaryCrossEntropy;
    cfg.max_epochs = 200;
    cfg.patience = 5;
    cfg.validation_fraction = 0.2;
    cfg.seed = 3;
    auto [trained, report] = train(net, x, y, cfg);
    CHECK(report.epochs_run <= 200);
    REQUIRE(!report.val_loss.empty());
    double best = report.val_loss[report.best_epoch];
    for (std::size_t e = report.best_epoch; e < report.val_loss.size(); ++e)
        CHECK(best <= report.val_loss[e]);
    // stopped exactly `patience` epochs past the best one (or hit max_epochs)
    if (report.epochs_run < 200) CHECK(report.epochs_run == report.best_epoch + 1 + 5);
}

TEST_CASE("train: patience without a validation split is a config error") {
    Matrix x(4, 2);
    std::vector<int> y = {0, 1, 0, 1};
    NetworkParams net = init_network({{2, 1, Activation::Sigmoid}}, 0);
    TrainConfig cfg;
    cfg.loss = Loss::BinaryCrossEntropy;
    cfg.patience = 5;
    cfg.validation_fraction = 0.0;
    CHECK_THROWS_AS(train(net, x, y, cfg), ConfigError);
}

TEST_CASE("train: single linear layer with mse descends monotonically") {
    Rng rng(8);
    Matrix x = random_matrix(32, 3, rng);
    Matrix t(32, 1);
    for (std::size_t i = 0; i < 32; ++i)
        t(i, 0) = 2.0 * x(i, 0) - x(i, 1) + 0.5 * x(i, 2) + 0.05 * rng.uniform(-1, 1);
    NetworkParams net = init_network({{3, 1, Activation::Linear}}, 4);
    TrainConfig cfg;
    cfg.loss = Loss::Mse;
    cfg.learning_rate = 1e-3;
    cfg.batch_size = 32;  // full batch
    cfg.max_epochs = 100;
    cfg.validation_fraction = 0.0;
    auto [trained, report] = train(net, x, t, cfg);
    REQUIRE(report.train_loss.size() == 100);
    for (std::size_t e = 1; e < report.train_loss.size(); ++e)
        CHECK(report.train_loss[e] <= report.train_loss[e - 1] + 1e-12);
}

TEST_CASE("train rejects an empty dataset") {
    NetworkParams net = init_network({{2, 1, Activation::Sigmoid}}, 0);
    Matrix x(0, 2);
    std::vector<int> y;
    TrainConfig cfg;
    cfg.loss = Loss::BinaryCrossEntropy;
    CHECK_THROWS_AS(train(net, x, y, cfg), DataError);
}

TEST_CASE("evaluate_accuracy: perfect one-hot outputs") {
    NetworkParams net = init_network({{3, 3, Activation::Linear}}, 0);
    net.weights[0] = make(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    Matrix x = make(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    std::vector<int> y = {0, 1, 2};
    CHECK(evaluate_accuracy(net, x, y) == 1.0);
}

TEST_CASE("evaluate_accuracy: constant 0.5 sigmoid output predicts class 0") {
    NetworkParams net = init_network({{2, 1, Activation::Sigmoid}}, 0);
    net.weights[0] = make(1, 2, {0, 0});
    net.biases[0] = {0};  // sigmoid(0) = 0.5, not above threshold -> class 0
    Matrix x = make(4, 2, {1, 2, 3, 4, 5, 6, 7, 8});
    std::vector<int> y = {0, 0, 1, 1};
    CHECK(evaluate_accuracy(net, x, y) == doctest::Approx(0.5));
}

TEST_CASE("evaluate_accuracy rejects empty input") {
    NetworkParams net = init_network({{2, 1, Activation::Sigmoid}}, 0);
    Matrix x(0, 2);
    std::vector<int> y;
    CHECK_THROWS_AS(evaluate_accuracy(net, x, y), DataError);
}

TEST_CASE("predict_labels breaks multi-class ties toward the lowest index") {
    NetworkParams net = init_network({{2, 3, Activation::Linear}}, 0);
    net.weights[0] = make(3, 2, {0, 0, 0, 0, 0, 0});
    net.biases[0] = {0.4, 0.4, 0.4};  // all outputs equal
    Matrix x = make(2, 2, {1, 2, 3, 4});
    std::vector<int> pred = predict_labels(net, x);
    CHECK(pred == std::vector<int>{0, 0});
}

TEST_CASE("FirstLayerCache matches a plain forward pass with zeroed columns") {
    Rng rng(55);
    NetworkParams net = init_network(
        {{6, 5, Activation::Relu}, {5, 4, Activation::Sigmoid}, {4, 3, Activation::Softmax}}, 14);
    Matrix x = random_matrix(12, 6, rng);
    FirstLayerCache cache(net, x);

    Matrix base = cache.forward_zeroed({});
    Matrix direct = forward(net, x);
    for (std::size_t i = 0; i < base.v.size(); ++i)
        CHECK(base.v[i] == doctest::Approx(direct.v[i]).epsilon(1e-12));

    std::vector<std::size_t> zero = {1, 4};
    Matrix xz = x;
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t j : zero) xz(i, j) = 0.0;
    Matrix expect = forward(net, xz);
    Matrix got = cache.forward_zeroed(zero);
    for (std::size_t i = 0; i < got.v.size(); ++i)
        CHECK(got.v[i] == doctest::Approx(expect.v[i]).epsilon(1e-10));
}
