#include "tutor/student.hpp"

#include <algorithm>
#include <cmath>

#include "tutor/checkpoint.hpp"
#include "tutor/error.hpp"

namespace tutor {

using nlohmann::json;

void StudentConfig::validate() const {
    if (hidden_layers < 1) throw ConfigError("StudentConfig: need at least one hidden layer");
    if (hidden_nodes < 1) throw ConfigError("StudentConfig: hidden_nodes must be >= 1");
    if (learning_rate < 0.0) throw ConfigError("StudentConfig: negative learning rate");
}

Student init_student(const StudentConfig& config, std::size_t n_features, std::size_t n_classes) {
    config.validate();
    if (n_features < 1 || n_classes < 1) {
        throw PreconditionError("init_student: need at least one feature and one class");
    }
    Student s;
    s.config = config;
    DenseNetSpec spec;
    spec.layer_sizes.push_back(n_features);
    for (std::size_t i = 0; i < config.hidden_layers; ++i) {
        spec.layer_sizes.push_back(config.hidden_nodes);
    }
    spec.layer_sizes.push_back(n_classes);
    spec.output_head = OutputHead::Softmax;
    spec.dropout_rate = 0.0;
    Rng init_rng(config.seed);
    s.net = DenseNet::init(spec, init_rng);
    s.optimizer = SgdMomentum::create(s.net, config.learning_rate, 0.0);
    s.rng = Rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    return s;
}

std::vector<std::size_t> encoded_matrix_indices(const DenseNet& net) {
    // Every weight matrix except input->first-hidden.
    std::vector<std::size_t> idx;
    for (std::size_t k = 1; k < net.n_layers(); ++k) idx.push_back(k);
    return idx;
}

std::size_t state_length(const Student& student) {
    std::size_t rows = 0;
    for (std::size_t k : encoded_matrix_indices(student.net)) {
        rows += student.net.weights[k].rows();
    }
    return 2 * rows;
}

ReferenceVector ReferenceVector::for_student(const Student& student) {
    ReferenceVector rv;
    for (std::size_t k : encoded_matrix_indices(student.net)) {
        const std::size_t m = student.net.weights[k].cols();
        rv.refs.emplace_back(m, 1.0 / std::sqrt(static_cast<double>(m)));
    }
    return rv;
}

std::vector<double> encode_state(const Student& student, const ReferenceVector& refs) {
    const auto indices = encoded_matrix_indices(student.net);
    if (refs.refs.size() != indices.size()) {
        throw DimensionError("encode_state: reference count does not match encoded matrices");
    }
    std::vector<double> state;
    state.reserve(state_length(student));
    for (std::size_t m = 0; m < indices.size(); ++m) {
        const Matrix& w = student.net.weights[indices[m]];
        const std::vector<double>& a = refs.refs[m];
        if (a.size() != w.cols()) {
            throw DimensionError("encode_state: reference length does not match matrix columns");
        }
        const double a_norm = norm(a);
        std::vector<double> angles;
        angles.reserve(w.rows());
        for (std::size_t r = 0; r < w.rows(); ++r) {
            const double* row = w.row_ptr(r);
            double d = 0.0, nn = 0.0;
            for (std::size_t c = 0; c < w.cols(); ++c) {
                d += row[c] * a[c];
                nn += row[c] * row[c];
            }
            const double row_norm = std::sqrt(nn);
            state.push_back(std::abs(d));
            if (row_norm < 1e-300) {
                angles.push_back(M_PI / 2.0);
            } else {
                const double c = std::clamp(d / (row_norm * a_norm), -1.0, 1.0);
                angles.push_back(std::acos(c));
            }
        }
        state.insert(state.end(), angles.begin(), angles.end());
    }
    return state;
}

void train_on_indices(Student& student, const Dataset& data,
                      const std::vector<std::size_t>& indices) {
    if (indices.empty()) throw PreconditionError("train_on_indices: empty index list");
    const std::size_t d = data.n_features();
    const std::size_t c = data.n_classes;
    if (d != student.net.input_size() || c != student.net.output_size()) {
        throw DimensionError("train_on_indices: dataset shape does not match student");
    }
    Matrix batch(indices.size(), d);
    Matrix targets(indices.size(), c);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= data.n_rows()) {
            throw PreconditionError("train_on_indices: index out of range");
        }
        const double* src = data.features.row_ptr(indices[i]);
        std::copy(src, src + d, batch.row_ptr(i));
        targets.at(i, static_cast<std::size_t>(data.labels[indices[i]])) = 1.0;
    }
    ForwardResult fwd = forward(student.net, batch, /*train_mode=*/true, student.rng);
    Gradients grads = backward(student.net, fwd, targets, Loss::CrossEntropy);
    sgd_step(student.optimizer, student.net, grads);
    ++student.step_counter;
}

double accuracy(const Student& student, const Dataset& split) {
    if (split.n_rows() == 0) throw PreconditionError("accuracy: empty split");
    const Matrix probs = predict(student.net, split.features);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        const double* p = probs.row_ptr(i);
        std::size_t best = 0;
        for (std::size_t j = 1; j < probs.cols(); ++j) {
            if (p[j] > p[best]) best = j;  // strict: ties keep the lowest id
        }
        if (static_cast<int>(best) == split.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(probs.rows());
}

double reward(double delta_t, double delta_prev, double validation_accuracy) {
    auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
    if (!in_unit(delta_t) || !in_unit(delta_prev) || !in_unit(validation_accuracy)) {
        throw PreconditionError("reward: inputs must lie in [0, 1]");
    }
    return (delta_t - delta_prev) * validation_accuracy;
}

std::vector<std::size_t> accuracy_subsample(std::size_t n_rows, std::size_t cap,
                                            std::uint64_t seed) {
    if (n_rows <= cap) {
        std::vector<std::size_t> all(n_rows);
        for (std::size_t i = 0; i < n_rows; ++i) all[i] = i;
        return all;
    }
    Rng rng(seed);
    auto picked = rng.sample_without_replacement(n_rows, cap);
    std::sort(picked.begin(), picked.end());
    return picked;
}

json student_to_json(const Student& student, double best_accuracy_so_far) {
    json j = net_to_json(student.net);
    j["optimizer"] = optimizer_to_json(student.optimizer);
    j["config"] = {{"hidden_layers", student.config.hidden_layers},
                   {"hidden_nodes", student.config.hidden_nodes},
                   {"learning_rate", student.config.learning_rate},
                   {"seed", student.config.seed}};
    j["step_counter"] = student.step_counter;
    j["best_accuracy_so_far"] = best_accuracy_so_far;
    return j;
}

Student student_from_json(const json& j) {
    Student s;
    s.net = net_from_json(j);
    s.optimizer = optimizer_from_json(j.at("optimizer"), s.net);
    const json& jc = j.at("config");
    s.config.hidden_layers = jc.at("hidden_layers").get<std::size_t>();
    s.config.hidden_nodes = jc.at("hidden_nodes").get<std::size_t>();
    s.config.learning_rate = jc.at("learning_rate").get<double>();
    s.config.seed = jc.at("seed").get<std::uint64_t>();
    s.step_counter = j.at("step_counter").get<std::size_t>();
    s.rng = Rng(s.config.seed ^ 0x9e3779b97f4a7c15ULL);
    return s;
}

}  // namespace tutor
