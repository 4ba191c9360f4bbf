#include "tutor/net.hpp"

#include <algorithm>
#include <cmath>

#include "tutor/error.hpp"

namespace tutor {
namespace {

void softmax_rows(const Matrix& logits, Matrix& out) {
    out = Matrix(logits.rows(), logits.cols());
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        const double* z = logits.row_ptr(i);
        double* p = out.row_ptr(i);
        double zmax = z[0];
        for (std::size_t j = 1; j < logits.cols(); ++j) zmax = std::max(zmax, z[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < logits.cols(); ++j) {
            p[j] = std::exp(z[j] - zmax);
            sum += p[j];
        }
        for (std::size_t j = 0; j < logits.cols(); ++j) p[j] /= sum;
    }
}

// log(sum_j exp(z_j)) with max subtraction; stays finite for finite logits.
double log_sum_exp(const double* z, std::size_t n) {
    double zmax = z[0];
    for (std::size_t j = 1; j < n; ++j) zmax = std::max(zmax, z[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) sum += std::exp(z[j] - zmax);
    return zmax + std::log(sum);
}

}  // namespace

std::string to_string(OutputHead head) {
    switch (head) {
        case OutputHead::Softmax: return "softmax";
        case OutputHead::Linear: return "linear";
        case OutputHead::Tanh: return "tanh";
    }
    return "softmax";
}

OutputHead output_head_from_string(const std::string& s) {
    if (s == "softmax") return OutputHead::Softmax;
    if (s == "linear") return OutputHead::Linear;
    if (s == "tanh") return OutputHead::Tanh;
    throw ConfigError("unknown output head: " + s);
}

void DenseNetSpec::validate() const {
    if (layer_sizes.size() < 3) {
        throw ConfigError("DenseNetSpec: need input, at least one hidden and output layer");
    }
    for (std::size_t s : layer_sizes) {
        if (s < 1) throw ConfigError("DenseNetSpec: layer sizes must be >= 1");
    }
    if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
        throw ConfigError("DenseNetSpec: dropout_rate must lie in [0, 1)");
    }
}

DenseNet DenseNet::init(const DenseNetSpec& spec, Rng& rng) {
    spec.validate();
    DenseNet net;
    net.spec = spec;
    const auto& ls = spec.layer_sizes;
    net.weights.reserve(ls.size() - 1);
    net.biases.reserve(ls.size() - 1);
    for (std::size_t k = 0; k + 1 < ls.size(); ++k) {
        const double bound = std::sqrt(6.0 / static_cast<double>(ls[k] + ls[k + 1]));
        Matrix w(ls[k], ls[k + 1]);
        for (double& x : w.data()) x = rng.uniform(-bound, bound);
        net.weights.push_back(std::move(w));
        net.biases.emplace_back(ls[k + 1], 0.0);
    }
    return net;
}

std::size_t DenseNet::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        n += weights[k].size() + biases[k].size();
    }
    return n;
}

Gradients Gradients::zeros_like(const DenseNet& net) {
    Gradients g;
    g.weights.reserve(net.weights.size());
    g.biases.reserve(net.biases.size());
    for (std::size_t k = 0; k < net.weights.size(); ++k) {
        g.weights.emplace_back(net.weights[k].rows(), net.weights[k].cols());
        g.biases.emplace_back(net.biases[k].size(), 0.0);
    }
    g.input = Matrix();
    return g;
}

bool Gradients::all_finite() const {
    for (const auto& w : weights) {
        if (!w.all_finite()) return false;
    }
    for (const auto& b : biases) {
        for (double x : b) {
            if (!std::isfinite(x)) return false;
        }
    }
    return true;
}

void Gradients::accumulate(const Gradients& other, double scale) {
    if (weights.size() != other.weights.size()) {
        throw DimensionError("Gradients::accumulate: layer counts disagree");
    }
    for (std::size_t k = 0; k < weights.size(); ++k) {
        weights[k].add_scaled(other.weights[k], scale);
        for (std::size_t j = 0; j < biases[k].size(); ++j) {
            biases[k][j] += scale * other.biases[k][j];
        }
    }
}

ForwardResult forward(const DenseNet& net, const Matrix& inputs, bool train_mode, Rng& rng) {
    if (inputs.cols() != net.input_size()) {
        throw DimensionError("forward: input width does not match the net");
    }
    ForwardResult fwd;
    fwd.layer_outputs.reserve(net.n_layers() + 1);
    fwd.layer_outputs.push_back(inputs);

    const double p = net.spec.dropout_rate;
    const bool use_dropout = train_mode && p > 0.0;
    const double keep_scale = use_dropout ? 1.0 / (1.0 - p) : 1.0;

    Matrix act = inputs;
    for (std::size_t k = 0; k < net.n_layers(); ++k) {
        Matrix z = act.matmul(net.weights[k]);
        z.add_row_vector(net.biases[k]);
        const bool is_output = (k + 1 == net.n_layers());
        if (is_output) {
            fwd.output_logits = z;
            Matrix out;
            switch (net.spec.output_head) {
                case OutputHead::Softmax:
                    softmax_rows(z, out);
                    break;
                case OutputHead::Linear:
                    out = std::move(z);
                    break;
                case OutputHead::Tanh:
                    out = std::move(z);
                    for (double& x : out.data()) x = std::tanh(x);
                    break;
            }
            fwd.layer_outputs.push_back(std::move(out));
        } else {
            for (double& x : z.data()) x = x > 0.0 ? x : 0.0;
            if (use_dropout) {
                Matrix scale(z.rows(), z.cols());
                for (std::size_t i = 0; i < scale.size(); ++i) {
                    scale.data()[i] = rng.bernoulli(p) ? 0.0 : keep_scale;
                }
                for (std::size_t i = 0; i < z.size(); ++i) z.data()[i] *= scale.data()[i];
                fwd.dropout_scale.push_back(std::move(scale));
            }
            act = z;
            fwd.layer_outputs.push_back(act);
        }
    }
    return fwd;
}

Matrix predict(const DenseNet& net, const Matrix& inputs) {
    Rng unused(0);
    return forward(net, inputs, /*train_mode=*/false, unused).output();
}

double compute_loss(const DenseNet& net, const ForwardResult& fwd, const Matrix& targets,
                    Loss loss) {
    const Matrix& out = fwd.output();
    if (!out.same_shape(targets)) {
        throw DimensionError("compute_loss: target shape does not match output");
    }
    const double n = static_cast<double>(out.rows());
    if (loss == Loss::CrossEntropy) {
        if (net.spec.output_head != OutputHead::Softmax) {
            throw ConfigError("cross-entropy loss requires a softmax head");
        }
        // -(1/n) sum targets * log p, evaluated from the logits so extreme
        // inputs cannot produce inf.
        double total = 0.0;
        for (std::size_t i = 0; i < out.rows(); ++i) {
            const double* z = fwd.output_logits.row_ptr(i);
            const double lse = log_sum_exp(z, out.cols());
            const double* t = targets.row_ptr(i);
            for (std::size_t j = 0; j < out.cols(); ++j) {
                if (t[j] != 0.0) total -= t[j] * (z[j] - lse);
            }
        }
        return total / n;
    }
    // Mse: mean over every output entry.
    double total = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double d = out.data()[i] - targets.data()[i];
        total += d * d;
    }
    return total / static_cast<double>(out.size());
}

namespace {

// Backpropagates dLoss/dLogits through the hidden stack.
Gradients backprop_from_logit_grad(const DenseNet& net, const ForwardResult& fwd,
                                   Matrix grad_z) {
    Gradients g = Gradients::zeros_like(net);
    const bool has_dropout = !fwd.dropout_scale.empty();
    for (std::size_t k = net.n_layers(); k-- > 0;) {
        const Matrix& layer_in = fwd.layer_outputs[k];
        g.weights[k] = layer_in.transposed_matmul(grad_z);
        g.biases[k] = grad_z.column_sums();
        Matrix grad_act = grad_z.matmul_transposed(net.weights[k]);
        if (k == 0) {
            g.input = std::move(grad_act);
            break;
        }
        // Through dropout scaling and the ReLU of hidden layer k-1. The
        // stored activation is already masked: positive iff the unit was
        // kept and its pre-activation was positive.
        const Matrix& act = fwd.layer_outputs[k];
        grad_z = std::move(grad_act);
        if (has_dropout) {
            const Matrix& scale = fwd.dropout_scale[k - 1];
            for (std::size_t i = 0; i < grad_z.size(); ++i) {
                grad_z.data()[i] *= (act.data()[i] > 0.0 ? 1.0 : 0.0) * scale.data()[i];
            }
        } else {
            for (std::size_t i = 0; i < grad_z.size(); ++i) {
                grad_z.data()[i] *= act.data()[i] > 0.0 ? 1.0 : 0.0;
            }
        }
    }
    return g;
}

}  // namespace

Gradients backward(const DenseNet& net, const ForwardResult& fwd, const Matrix& targets,
                   Loss loss) {
    const Matrix& out = fwd.output();
    if (targets.rows() != out.rows()) {
        throw DimensionError("backward: batch sizes disagree");
    }
    if (!out.same_shape(targets)) {
        throw DimensionError("backward: target shape does not match output");
    }
    const double n = static_cast<double>(out.rows());

    if (loss == Loss::CrossEntropy) {
        if (net.spec.output_head != OutputHead::Softmax) {
            throw ConfigError("cross-entropy loss requires a softmax head");
        }
        // dL/dz = (p - onehot) / n at the logits.
        Matrix grad_z(out.rows(), out.cols());
        for (std::size_t i = 0; i < out.size(); ++i) {
            grad_z.data()[i] = (out.data()[i] - targets.data()[i]) / n;
        }
        return backprop_from_logit_grad(net, fwd, std::move(grad_z));
    }

    // Mse: dL/dout = 2 (out - target) / (n * d), then through the head.
    Matrix grad_out(out.rows(), out.cols());
    const double scale = 2.0 / static_cast<double>(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        grad_out.data()[i] = scale * (out.data()[i] - targets.data()[i]);
    }
    return backward_from_output_grad(net, fwd, grad_out);
}

Gradients backward_from_output_grad(const DenseNet& net, const ForwardResult& fwd,
                                    const Matrix& grad_output) {
    const Matrix& out = fwd.output();
    if (!grad_output.same_shape(out)) {
        throw DimensionError("backward_from_output_grad: gradient shape mismatch");
    }
    Matrix grad_z(out.rows(), out.cols());
    switch (net.spec.output_head) {
        case OutputHead::Linear:
            grad_z = grad_output;
            break;
        case OutputHead::Tanh:
            for (std::size_t i = 0; i < out.size(); ++i) {
                const double y = out.data()[i];
                grad_z.data()[i] = grad_output.data()[i] * (1.0 - y * y);
            }
            break;
        case OutputHead::Softmax:
            // Row-wise Jacobian: dz_j = p_j (g_j - sum_k g_k p_k).
            for (std::size_t i = 0; i < out.rows(); ++i) {
                const double* p = out.row_ptr(i);
                const double* gr = grad_output.row_ptr(i);
                double inner = 0.0;
                for (std::size_t j = 0; j < out.cols(); ++j) inner += gr[j] * p[j];
                double* gz = grad_z.row_ptr(i);
                for (std::size_t j = 0; j < out.cols(); ++j) gz[j] = p[j] * (gr[j] - inner);
            }
            break;
    }
    return backprop_from_logit_grad(net, fwd, std::move(grad_z));
}

SgdMomentum SgdMomentum::create(const DenseNet& net, double learning_rate, double momentum) {
    if (learning_rate < 0.0) throw ConfigError("SgdMomentum: negative learning rate");
    if (momentum < 0.0 || momentum >= 1.0) {
        throw ConfigError("SgdMomentum: momentum must lie in [0, 1)");
    }
    SgdMomentum opt;
    opt.learning_rate = learning_rate;
    opt.momentum = momentum;
    for (std::size_t k = 0; k < net.weights.size(); ++k) {
        opt.velocity_w.emplace_back(net.weights[k].rows(), net.weights[k].cols());
        opt.velocity_b.emplace_back(net.biases[k].size(), 0.0);
    }
    return opt;
}

void sgd_step(SgdMomentum& opt, DenseNet& net, const Gradients& grads) {
    if (opt.velocity_w.size() != net.weights.size() ||
        grads.weights.size() != net.weights.size()) {
        throw DimensionError("sgd_step: layer counts disagree");
    }
    // Validate everything before mutating so a rejected step changes nothing.
    for (std::size_t k = 0; k < net.weights.size(); ++k) {
        if (!opt.velocity_w[k].same_shape(grads.weights[k]) ||
            opt.velocity_b[k].size() != grads.biases[k].size()) {
            throw DimensionError("sgd_step: gradient shape mismatch");
        }
    }
    if (!grads.all_finite()) {
        throw NumericError("sgd_step: non-finite gradient entry, step aborted");
    }
    for (std::size_t k = 0; k < net.weights.size(); ++k) {
        Matrix& vw = opt.velocity_w[k];
        for (std::size_t i = 0; i < vw.size(); ++i) {
            vw.data()[i] = opt.momentum * vw.data()[i] + grads.weights[k].data()[i];
            net.weights[k].data()[i] -= opt.learning_rate * vw.data()[i];
        }
        auto& vb = opt.velocity_b[k];
        for (std::size_t j = 0; j < vb.size(); ++j) {
            vb[j] = opt.momentum * vb[j] + grads.biases[k][j];
            net.biases[k][j] -= opt.learning_rate * vb[j];
        }
    }
}

Gradients finite_diff_grad(const DenseNet& net, const Matrix& inputs, const Matrix& targets,
                           Loss loss, double epsilon) {
    if (epsilon <= 0.0) throw PreconditionError("finite_diff_grad: epsilon must be > 0");
    DenseNet probe = net;
    Rng unused(0);
    Gradients g = Gradients::zeros_like(net);

    auto eval = [&]() {
        ForwardResult fwd = forward(probe, inputs, /*train_mode=*/false, unused);
        return compute_loss(probe, fwd, targets, loss);
    };

    for (std::size_t k = 0; k < net.weights.size(); ++k) {
        for (std::size_t i = 0; i < net.weights[k].size(); ++i) {
            double& p = probe.weights[k].data()[i];
            const double saved = p;
            p = saved + epsilon;
            const double up = eval();
            p = saved - epsilon;
            const double down = eval();
            p = saved;
            g.weights[k].data()[i] = (up - down) / (2.0 * epsilon);
        }
        for (std::size_t j = 0; j < net.biases[k].size(); ++j) {
            double& p = probe.biases[k][j];
            const double saved = p;
            p = saved + epsilon;
            const double up = eval();
            p = saved - epsilon;
            const double down = eval();
            p = saved;
            g.biases[k][j] = (up - down) / (2.0 * epsilon);
        }
    }
    return g;
}

}  // namespace tutor
