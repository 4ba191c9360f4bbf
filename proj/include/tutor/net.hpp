#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tutor/matrix.hpp"
#include "tutor/rng.hpp"

namespace tutor {

enum class OutputHead { Softmax, Linear, Tanh };
enum class Loss { CrossEntropy, Mse };

std::string to_string(OutputHead head);
OutputHead output_head_from_string(const std::string& s);

// Fully-connected feedforward topology: ReLU on hidden layers, one of three
// output heads, optional inverted dropout on hidden activations.
struct DenseNetSpec {
    std::vector<std::size_t> layer_sizes;  // input, hidden..., output
    OutputHead output_head = OutputHead::Softmax;
    double dropout_rate = 0.0;

    void validate() const;
    std::size_t n_hidden() const { return layer_sizes.size() - 2; }
};

struct DenseNet {
    DenseNetSpec spec;
    std::vector<Matrix> weights;              // weights[k]: layer_sizes[k] x layer_sizes[k+1]
    std::vector<std::vector<double>> biases;  // biases[k]: layer_sizes[k+1]

    // Glorot-uniform weights, zero biases.
    static DenseNet init(const DenseNetSpec& spec, Rng& rng);

    std::size_t input_size() const { return spec.layer_sizes.front(); }
    std::size_t output_size() const { return spec.layer_sizes.back(); }
    std::size_t n_layers() const { return weights.size(); }
    std::size_t parameter_count() const;
};

struct ForwardResult {
    // layer_outputs[0] is the input batch; layer_outputs[k+1] is the
    // post-activation (and post-dropout) output of layer k. The last entry
    // is the post-head network output.
    std::vector<Matrix> layer_outputs;
    // Pre-head linear output of the last layer; kept so losses can be
    // evaluated in a numerically stable way.
    Matrix output_logits;
    // Per hidden layer: entries are 0 or 1/(1-p). Empty in eval mode.
    std::vector<Matrix> dropout_scale;

    const Matrix& output() const { return layer_outputs.back(); }
};

struct Gradients {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
    Matrix input;  // dLoss/dInput, useful for chaining networks

    static Gradients zeros_like(const DenseNet& net);
    bool all_finite() const;
    void accumulate(const Gradients& other, double scale = 1.0);
};

// Runs the batch through the net. Dropout masks are drawn from `rng` only
// when train_mode is set; eval mode never touches the generator.
ForwardResult forward(const DenseNet& net, const Matrix& inputs, bool train_mode, Rng& rng);

// Eval-mode forward returning just the output.
Matrix predict(const DenseNet& net, const Matrix& inputs);

// Mean loss over the batch. CrossEntropy requires a softmax head and one-hot
// targets; Mse works with any head.
double compute_loss(const DenseNet& net, const ForwardResult& fwd, const Matrix& targets,
                    Loss loss);

// Parameter (and input) gradients of compute_loss.
Gradients backward(const DenseNet& net, const ForwardResult& fwd, const Matrix& targets,
                   Loss loss);

// Backpropagates an arbitrary dLoss/dOutput through the net, including the
// output head. Lets callers chain networks (e.g. critic into actor).
Gradients backward_from_output_grad(const DenseNet& net, const ForwardResult& fwd,
                                    const Matrix& grad_output);

struct SgdMomentum {
    double learning_rate = 0.01;
    double momentum = 0.0;
    std::vector<Matrix> velocity_w;
    std::vector<std::vector<double>> velocity_b;

    static SgdMomentum create(const DenseNet& net, double learning_rate, double momentum);
};

// velocity <- momentum * velocity + grad; params <- params - lr * velocity.
// Rejects non-finite gradients without touching the parameters.
void sgd_step(SgdMomentum& opt, DenseNet& net, const Gradients& grads);

// Central-difference gradient oracle: (L(p+eps) - L(p-eps)) / (2 eps) per
// parameter, with the loss evaluated in eval mode. Test / verification use.
Gradients finite_diff_grad(const DenseNet& net, const Matrix& inputs, const Matrix& targets,
                           Loss loss, double epsilon);

}  // namespace tutor
