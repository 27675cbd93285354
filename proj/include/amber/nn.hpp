#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "amber/matrix.hpp"

namespace amber {

enum class Activation { Relu, Sigmoid, Softmax, Linear };
enum class Loss { CrossEntropy, BinaryCrossEntropy, Mse };

std::string to_string(Activation a);
std::string to_string(Loss l);
Activation activation_from_string(const std::string& s);
Loss loss_from_string(const std::string& s);

struct LayerSpec {
    std::size_t input_width = 0;
    std::size_t output_width = 0;
    Activation activation = Activation::Linear;
};

// Full parameter set of a dense network. weights[l] is output_width x
// input_width, biases[l] has output_width entries.
struct NetworkParams {
    std::vector<LayerSpec> specs;
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;

    std::size_t input_width() const { return specs.empty() ? 0 : specs.front().input_width; }
    std::size_t output_width() const { return specs.empty() ? 0 : specs.back().output_width; }
    bool finite() const;
};

bool operator==(const NetworkParams& a, const NetworkParams& b);

struct TrainConfig {
    Loss loss = Loss::Mse;
    double learning_rate = 0.01;
    std::size_t batch_size = 32;
    std::size_t max_epochs = 100;
    std::size_t patience = 0;  // 0 disables early stopping
    double validation_fraction = 0.1;
    std::uint64_t seed = 0;
};

struct TrainReport {
    std::size_t epochs_run = 0;
    std::vector<double> train_loss;
    std::vector<double> val_loss;  // empty when no validation split
    std::size_t best_epoch = 0;
};

// Classification targets are integer labels; regression/reconstruction
// targets are a dense matrix. Exactly one of the two is set.
struct Targets {
    const std::vector<int>* labels = nullptr;
    const Matrix* dense = nullptr;

    static Targets of(const std::vector<int>& y) { return {&y, nullptr}; }
    static Targets of(const Matrix& t) { return {nullptr, &t}; }
    std::size_t count() const { return labels ? labels->size() : dense->rows; }
};

struct Gradients {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
};

// Glorot-uniform weights, zero biases; bitwise deterministic for a given seed.
NetworkParams init_network(const std::vector<LayerSpec>& specs, std::uint64_t seed);

Matrix forward(const NetworkParams& net, const Matrix& inputs);

// Mean per-example loss. Cross-entropy uses natural log with predictions
// clamped to [1e-12, 1]; mse and bce average over all output entries.
double loss_value(const Matrix& outputs, const Targets& targets, Loss loss);
double loss_value(const Matrix& outputs, const std::vector<int>& labels, Loss loss);
double loss_value(const Matrix& outputs, const Matrix& targets, Loss loss);

Gradients gradients(const NetworkParams& net, const Matrix& inputs, const Targets& targets,
                    Loss loss);

std::pair<NetworkParams, TrainReport> train(const NetworkParams& net, const Matrix& x,
                                            const Targets& targets, const TrainConfig& cfg);
std::pair<NetworkParams, TrainReport> train(const NetworkParams& net, const Matrix& x,
                                            const std::vector<int>& y, const TrainConfig& cfg);
std::pair<NetworkParams, TrainReport> train(const NetworkParams& net, const Matrix& x,
                                            const Matrix& targets, const TrainConfig& cfg);

// Fraction of argmax-correct predictions; ties pick the lowest index. A
// single-output network predicts class 1 when the output exceeds 0.5.
double evaluate_accuracy(const NetworkParams& net, const Matrix& x, const std::vector<int>& y);

// Argmax class predictions under the same tie rule as evaluate_accuracy.
std::vector<int> predict_labels(const NetworkParams& net, const Matrix& x);

// Repeated forward passes over the same inputs where only a few input
// columns get zeroed each time. The first-layer preactivation is computed
// once; zeroing column j is a rank-1 correction (subtract x[:,j] outer
// w1[:,j]), after which only the remaining layers are evaluated. Keeps
// per-candidate scoring linear in the hidden width instead of the input
// width.
class FirstLayerCache {
public:
    FirstLayerCache(const NetworkParams& net, const Matrix& x);

    // Network output with the given input columns treated as zero.
    Matrix forward_zeroed(const std::vector<std::size_t>& zero_cols) const;

private:
    const NetworkParams& net_;
    const Matrix& x_;
    Matrix z1_;
};

}  // namespace amber
