#include "amber/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "amber/errors.hpp"
#include "amber/rng.hpp"

namespace amber {

namespace {

constexpr double kLogClamp = 1e-12;

void validate_specs(const std::vector<LayerSpec>& specs) {
    if (specs.empty()) throw ConfigError("network: empty layer list");
    for (std::size_t i = 0; i < specs.size(); ++i) {
        if (specs[i].input_width == 0 || specs[i].output_width == 0)
            throw ConfigError("network: zero-width layer " + std::to_string(i));
        if (i + 1 < specs.size()) {
            if (specs[i].output_width != specs[i + 1].input_width)
                throw ConfigError("network: layer " + std::to_string(i) + " output width " +
                                  std::to_string(specs[i].output_width) + " != layer " +
                                  std::to_string(i + 1) + " input width " +
                                  std::to_string(specs[i + 1].input_width));
            if (specs[i].activation == Activation::Softmax)
                throw ConfigError("network: softmax allowed only on the final layer");
        }
    }
}

void apply_activation(Matrix& z, Activation act) {
    switch (act) {
        case Activation::Linear:
            return;
        case Activation::Relu:
            for (double& x : z.v)
                if (x < 0.0) x = 0.0;
            return;
        case Activation::Sigmoid:
            for (double& x : z.v) x = 1.0 / (1.0 + std::exp(-x));
            return;
        case Activation::Softmax:
            for (std::size_t i = 0; i < z.rows; ++i) {
                double* r = z.row(i);
                double mx = r[0];
                for (std::size_t j = 1; j < z.cols; ++j) mx = std::max(mx, r[j]);
                double sum = 0.0;
                for (std::size_t j = 0; j < z.cols; ++j) {
                    r[j] = std::exp(r[j] - mx);
                    sum += r[j];
                }
                for (std::size_t j = 0; j < z.cols; ++j) r[j] /= sum;
            }
            return;
    }
}

Matrix affine(const Matrix& x, const Matrix& w, const std::vector<double>& b) {
    Matrix z = matmul_nt(x, w);
    for (std::size_t i = 0; i < z.rows; ++i) {
        double* r = z.row(i);
        for (std::size_t j = 0; j < z.cols; ++j) r[j] += b[j];
    }
    return z;
}

// dLoss/dOutputs for the mean batch loss. Cross-entropy treats predictions
// outside the clamp range as constants (zero gradient), matching loss_value.
Matrix loss_output_grad(const Matrix& out, const Targets& t, Loss loss) {
    Matrix g(out.rows, out.cols);
    const double n = static_cast<double>(out.rows);
    switch (loss) {
        case Loss::CrossEntropy: {
            const auto& y = *t.labels;
            for (std::size_t i = 0; i < out.rows; ++i) {
                std::size_t c = static_cast<std::size_t>(y[i]);
                double p = out(i, c);
                if (p >= kLogClamp && p <= 1.0) g(i, c) = -1.0 / (n * p);
            }
            return g;
        }
        case Loss::BinaryCrossEntropy: {
            const double scale = n * static_cast<double>(out.cols);
            for (std::size_t i = 0; i < out.rows; ++i) {
                for (std::size_t j = 0; j < out.cols; ++j) {
                    double y = t.labels ? ((*t.labels)[i] ? 1.0 : 0.0) : (*t.dense)(i, j);
                    double p = out(i, j);
                    double d = 0.0;
                    if (p > kLogClamp && p < 1.0 - kLogClamp) d = -y / p + (1.0 - y) / (1.0 - p);
                    g(i, j) = d / scale;
                }
            }
            return g;
        }
        case Loss::Mse: {
            const double scale = 2.0 / (n * static_cast<double>(out.cols));
            for (std::size_t i = 0; i < out.rows; ++i) {
                for (std::size_t j = 0; j < out.cols; ++j) {
                    double y = t.dense ? (*t.dense)(i, j)
                                       : (static_cast<std::size_t>((*t.labels)[i]) == j ? 1.0 : 0.0);
                    g(i, j) = scale * (out(i, j) - y);
                }
            }
            return g;
        }
    }
    return g;
}

// dLoss/dPreactivation from dLoss/dActivation.
Matrix activation_backward(const Matrix& da, const Matrix& a, Activation act) {
    Matrix dz = da;
    switch (act) {
        case Activation::Linear:
            return dz;
        case Activation::Relu:
            for (std::size_t i = 0; i < dz.v.size(); ++i)
                if (a.v[i] <= 0.0) dz.v[i] = 0.0;
            return dz;
        case Activation::Sigmoid:
            for (std::size_t i = 0; i < dz.v.size(); ++i) dz.v[i] *= a.v[i] * (1.0 - a.v[i]);
            return dz;
        case Activation::Softmax:
            for (std::size_t i = 0; i < dz.rows; ++i) {
                const double* ar = a.row(i);
                const double* dr = da.row(i);
                double dot = 0.0;
                for (std::size_t j = 0; j < a.cols; ++j) dot += dr[j] * ar[j];
                double* zr = dz.row(i);
                for (std::size_t j = 0; j < a.cols; ++j) zr[j] = ar[j] * (dr[j] - dot);
            }
            return dz;
    }
    return dz;
}

Matrix gather_rows(const Matrix& x, const std::vector<std::size_t>& idx) {
    Matrix out(idx.size(), x.cols);
    for (std::size_t i = 0; i < idx.size(); ++i)
        std::copy(x.row(idx[i]), x.row(idx[i]) + x.cols, out.row(i));
    return out;
}

struct TargetSlice {
    std::vector<int> labels;
    Matrix dense;
    bool is_labels = false;

    Targets view() const { return is_labels ? Targets::of(labels) : Targets::of(dense); }
};

TargetSlice gather_targets(const Targets& t, const std::vector<std::size_t>& idx) {
    TargetSlice s;
    if (t.labels) {
        s.is_labels = true;
        s.labels.reserve(idx.size());
        for (std::size_t i : idx) s.labels.push_back((*t.labels)[i]);
    } else {
        s.dense = gather_rows(*t.dense, idx);
    }
    return s;
}

void validate_targets(const Matrix& out, const Targets& t, Loss loss) {
    if (t.labels) {
        if (t.labels->size() != out.rows) throw ShapeError("loss: target count mismatch");
        std::size_t classes = loss == Loss::BinaryCrossEntropy && out.cols == 1 ? 2 : out.cols;
        for (int y : *t.labels)
            if (y < 0 || static_cast<std::size_t>(y) >= classes)
                throw DataError("loss: label " + std::to_string(y) + " out of class range");
    } else {
        if (!t.dense->same_shape(out)) throw ShapeError("loss: target shape mismatch");
    }
}

}  // namespace

std::string to_string(Activation a) {
    switch (a) {
        case Activation::Relu: return "relu";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Softmax: return "softmax";
        case Activation::Linear: return "linear";
    }
    return "?";
}

std::string to_string(Loss l) {
    switch (l) {
        case Loss::CrossEntropy: return "cross_entropy";
        case Loss::BinaryCrossEntropy: return "binary_cross_entropy";
        case Loss::Mse: return "mse";
    }
    return "?";
}

Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::Relu;
    if (s == "sigmoid") return Activation::Sigmoid;
    if (s == "softmax") return Activation::Softmax;
    if (s == "linear") return Activation::Linear;
    throw ConfigError("unknown activation: " + s);
}

Loss loss_from_string(const std::string& s) {
    if (s == "cross_entropy") return Loss::CrossEntropy;
    if (s == "binary_cross_entropy") return Loss::BinaryCrossEntropy;
    if (s == "mse") return Loss::Mse;
    throw ConfigError("unknown loss: " + s);
}

bool NetworkParams::finite() const {
    for (const auto& w : weights)
        for (double x : w.v)
            if (!std::isfinite(x)) return false;
    for (const auto& b : biases)
        for (double x : b)
            if (!std::isfinite(x)) return false;
    return true;
}

bool operator==(const NetworkParams& a, const NetworkParams& b) {
    if (a.weights.size() != b.weights.size()) return false;
    for (std::size_t l = 0; l < a.weights.size(); ++l)
        if (a.weights[l].v != b.weights[l].v || a.biases[l] != b.biases[l]) return false;
    return true;
}

NetworkParams init_network(const std::vector<LayerSpec>& specs, std::uint64_t seed) {
    validate_specs(specs);
    NetworkParams net;
    net.specs = specs;
    Rng rng(seed);
    for (const auto& s : specs) {
        double limit = std::sqrt(6.0 / static_cast<double>(s.input_width + s.output_width));
        Matrix w(s.output_width, s.input_width);
        for (double& x : w.v) x = rng.uniform(-limit, limit);
        net.weights.push_back(std::move(w));
        net.biases.emplace_back(s.output_width, 0.0);
    }
    return net;
}

Matrix forward(const NetworkParams& net, const Matrix& inputs) {
    if (inputs.cols != net.input_width())
        throw ShapeError("forward: input width " + std::to_string(inputs.cols) + " != " +
                         std::to_string(net.input_width()));
    Matrix a = inputs;
    for (std::size_t l = 0; l < net.specs.size(); ++l) {
        a = affine(a, net.weights[l], net.biases[l]);
        apply_activation(a, net.specs[l].activation);
    }
    return a;
}

double loss_value(const Matrix& outputs, const Targets& t, Loss loss) {
    validate_targets(outputs, t, loss);
    const double n = static_cast<double>(outputs.rows);
    double total = 0.0;
    switch (loss) {
        case Loss::CrossEntropy: {
            for (std::size_t i = 0; i < outputs.rows; ++i) {
                double p = outputs(i, static_cast<std::size_t>((*t.labels)[i]));
                total += -std::log(std::clamp(p, kLogClamp, 1.0));
            }
            return total / n;
        }
        case Loss::BinaryCrossEntropy: {
            for (std::size_t i = 0; i < outputs.rows; ++i) {
                for (std::size_t j = 0; j < outputs.cols; ++j) {
                    double y = t.labels ? ((*t.labels)[i] ? 1.0 : 0.0) : (*t.dense)(i, j);
                    double p = std::clamp(outputs(i, j), kLogClamp, 1.0 - kLogClamp);
                    total += -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
                }
            }
            return total / (n * static_cast<double>(outputs.cols));
        }
        case Loss::Mse: {
            for (std::size_t i = 0; i < outputs.rows; ++i) {
                for (std::size_t j = 0; j < outputs.cols; ++j) {
                    double y = t.dense ? (*t.dense)(i, j)
                                       : (static_cast<std::size_t>((*t.labels)[i]) == j ? 1.0 : 0.0);
                    double d = outputs(i, j) - y;
                    total += d * d;
                }
            }
            return total / (n * static_cast<double>(outputs.cols));
        }
    }
    return total;
}

double loss_value(const Matrix& outputs, const std::vector<int>& labels, Loss loss) {
    return loss_value(outputs, Targets::of(labels), loss);
}

double loss_value(const Matrix& outputs, const Matrix& targets, Loss loss) {
    return loss_value(outputs, Targets::of(targets), loss);
}

Gradients gradients(const NetworkParams& net, const Matrix& inputs, const Targets& t, Loss loss) {
    if (inputs.rows == 0) throw DataError("gradients: empty batch");
    const std::size_t layers = net.specs.size();
    // forward, keeping every activation
    std::vector<Matrix> acts;
    acts.reserve(layers + 1);
    acts.push_back(inputs);
    for (std::size_t l = 0; l < layers; ++l) {
        Matrix a = affine(acts.back(), net.weights[l], net.biases[l]);
        apply_activation(a, net.specs[l].activation);
        acts.push_back(std::move(a));
    }
    validate_targets(acts.back(), t, loss);

    Gradients g;
    g.weights.resize(layers);
    g.biases.resize(layers);
    Matrix da = loss_output_grad(acts.back(), t, loss);
    for (std::size_t li = layers; li > 0; --li) {
        std::size_t l = li - 1;
        Matrix dz = activation_backward(da, acts[l + 1], net.specs[l].activation);
        g.weights[l] = matmul_tn(dz, acts[l]);
        g.biases[l].assign(net.specs[l].output_width, 0.0);
        for (std::size_t i = 0; i < dz.rows; ++i) {
            const double* r = dz.row(i);
            for (std::size_t j = 0; j < dz.cols; ++j) g.biases[l][j] += r[j];
        }
        if (l > 0) da = matmul(dz, net.weights[l]);
    }
    return g;
}

std::pair<NetworkParams, TrainReport> train(const NetworkParams& net, const Matrix& x,
                                            const Targets& targets, const TrainConfig& cfg) {
    if (x.rows == 0) throw DataError("train: empty dataset");
    if (targets.count() != x.rows) throw ShapeError("train: target count mismatch");
    if (cfg.learning_rate <= 0.0) throw ConfigError("train: learning_rate must be positive");
    if (cfg.batch_size == 0) throw ConfigError("train: batch_size must be positive");
    if (cfg.validation_fraction < 0.0 || cfg.validation_fraction >= 1.0)
        throw ConfigError("train: validation_fraction must be in [0,1)");
    if (cfg.patience > 0 && cfg.validation_fraction <= 0.0)
        throw ConfigError("train: patience requires validation_fraction > 0");

    NetworkParams params = net;
    TrainReport report;
    if (cfg.max_epochs == 0) return {params, report};

    Rng rng(cfg.seed);
    std::vector<std::size_t> order(x.rows);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    std::size_t val_n = static_cast<std::size_t>(std::floor(cfg.validation_fraction *
                                                            static_cast<double>(x.rows)));
    if (cfg.patience > 0 && val_n == 0)
        throw DataError("train: validation split is empty; dataset too small for early stopping");
    std::vector<std::size_t> train_idx(order.begin(), order.end() - val_n);
    std::vector<std::size_t> val_idx(order.end() - val_n, order.end());
    if (train_idx.empty()) throw DataError("train: no training rows left after validation split");

    Matrix val_x;
    TargetSlice val_t;
    if (val_n > 0) {
        val_x = gather_rows(x, val_idx);
        val_t = gather_targets(targets, val_idx);
    }

    double best_val = std::numeric_limits<double>::infinity();
    NetworkParams best_params = params;
    std::size_t epochs_without_improvement = 0;

    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        rng.shuffle(train_idx);
        for (std::size_t start = 0; start < train_idx.size(); start += cfg.batch_size) {
            std::size_t end = std::min(train_idx.size(), start + cfg.batch_size);
            std::vector<std::size_t> batch(train_idx.begin() + start, train_idx.begin() + end);
            Matrix bx = gather_rows(x, batch);
            TargetSlice bt = gather_targets(targets, batch);
            Gradients g = gradients(params, bx, bt.view(), cfg.loss);
            for (std::size_t l = 0; l < params.weights.size(); ++l) {
                double* w = params.weights[l].v.data();
                const double* gw = g.weights[l].v.data();
                for (std::size_t i = 0; i < params.weights[l].v.size(); ++i)
                    w[i] -= cfg.learning_rate * gw[i];
                for (std::size_t i = 0; i < params.biases[l].size(); ++i)
                    params.biases[l][i] -= cfg.learning_rate * g.biases[l][i];
            }
        }
        if (!params.finite()) throw NumericError("train: non-finite parameters after epoch " +
                                                 std::to_string(epoch));

        Matrix train_x = gather_rows(x, train_idx);
        TargetSlice train_t = gather_targets(targets, train_idx);
        report.train_loss.push_back(loss_value(forward(params, train_x), train_t.view(), cfg.loss));
        report.epochs_run = epoch + 1;

        if (val_n > 0) {
            double vl = loss_value(forward(params, val_x), val_t.view(), cfg.loss);
            report.val_loss.push_back(vl);
            if (vl < best_val) {
                best_val = vl;
                report.best_epoch = epoch;
                best_params = params;
                epochs_without_improvement = 0;
            } else {
                ++epochs_without_improvement;
            }
            if (cfg.patience > 0 && epochs_without_improvement >= cfg.patience) break;
        }
    }

    if (cfg.patience > 0) return {best_params, report};
    if (report.val_loss.empty()) report.best_epoch = report.epochs_run - 1;
    return {params, report};
}

std::pair<NetworkParams, TrainReport> train(const NetworkParams& net, const Matrix& x,
                                            const std::vector<int>& y, const TrainConfig& cfg) {
    return train(net, x, Targets::of(y), cfg);
}

std::pair<NetworkParams, TrainReport> train(const NetworkParams& net, const Matrix& x,
                                            const Matrix& targets, const TrainConfig& cfg) {
    return train(net, x, Targets::of(targets), cfg);
}

std::vector<int> predict_labels(const NetworkParams& net, const Matrix& x) {
    Matrix out = forward(net, x);
    std::vector<int> pred(out.rows, 0);
    if (out.cols == 1) {
        for (std::size_t i = 0; i < out.rows; ++i) pred[i] = out(i, 0) > 0.5 ? 1 : 0;
        return pred;
    }
    for (std::size_t i = 0; i < out.rows; ++i) {
        const double* r = out.row(i);
        std::size_t best = 0;
        for (std::size_t j = 1; j < out.cols; ++j)
            if (r[j] > r[best]) best = j;
        pred[i] = static_cast<int>(best);
    }
    return pred;
}

double evaluate_accuracy(const NetworkParams& net, const Matrix& x, const std::vector<int>& y) {
    if (x.rows == 0) throw DataError("evaluate_accuracy: empty input");
    if (y.size() != x.rows) throw ShapeError("evaluate_accuracy: label count mismatch");
    std::vector<int> pred = predict_labels(net, x);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (pred[i] == y[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(y.size());
}

FirstLayerCache::FirstLayerCache(const NetworkParams& net, const Matrix& x)
    : net_(net), x_(x) {
    if (x.cols != net.input_width()) throw ShapeError("FirstLayerCache: input width mismatch");
    z1_ = affine(x, net.weights[0], net.biases[0]);
}

Matrix FirstLayerCache::forward_zeroed(const std::vector<std::size_t>& zero_cols) const {
    Matrix a = z1_;
    const Matrix& w0 = net_.weights[0];
    for (std::size_t j : zero_cols) {
        if (j >= x_.cols) throw ShapeError("forward_zeroed: column out of range");
        for (std::size_t i = 0; i < a.rows; ++i) {
            double xij = x_(i, j);
            if (xij == 0.0) continue;
            double* zr = a.row(i);
            for (std::size_t h = 0; h < a.cols; ++h) zr[h] -= xij * w0(h, j);
        }
    }
    apply_activation(a, net_.specs[0].activation);
    for (std::size_t l = 1; l < net_.specs.size(); ++l) {
        a = affine(a, net_.weights[l], net_.biases[l]);
        apply_activation(a, net_.specs[l].activation);
    }
    return a;
}

}  // namespace amber
