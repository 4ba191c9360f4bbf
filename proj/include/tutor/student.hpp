#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tutor/dataset.hpp"
#include "tutor/net.hpp"
#include "tutor/rng.hpp"

#include <json.hpp>

namespace tutor {

struct StudentConfig {
    std::size_t hidden_layers = 2;
    std::size_t hidden_nodes = 50;
    double learning_rate = 0.001;
    std::uint64_t seed = 0;

    void validate() const;
};

// The classifier being taught. Plain SGD (momentum 0), ReLU hidden layers,
// softmax output.
struct Student {
    StudentConfig config;
    DenseNet net;
    SgdMomentum optimizer;
    std::size_t step_counter = 0;
    Rng rng;  // drives dropout-free training batches deterministically

    Student() : rng(0) {}
};

Student init_student(const StudentConfig& config, std::size_t n_features, std::size_t n_classes);

// One unit reference vector per encoded weight matrix. The state encodes the
// matrices whose row counts are the hidden-layer widths (hidden->hidden and
// last-hidden->output); the input->hidden matrix and biases are excluded so
// the state dimension does not depend on the feature count.
struct ReferenceVector {
    std::vector<std::vector<double>> refs;

    static ReferenceVector for_student(const Student& student);
};

// Indices (into net.weights) of the matrices contributing to the state.
std::vector<std::size_t> encoded_matrix_indices(const DenseNet& net);

// Expected state length: 2 * sum of encoded-matrix row counts.
std::size_t state_length(const Student& student);

// Per encoded matrix: all |<row, a>| magnitudes, then all angles
// arccos(<row,a> / (|row| |a|)); zero-norm rows contribute angle pi/2.
std::vector<double> encode_state(const Student& student, const ReferenceVector& refs);

// One forward/backward/SGD step treating the selected rows as a mini-batch.
void train_on_indices(Student& student, const Dataset& data,
                      const std::vector<std::size_t>& indices);

// Fraction of argmax-correct rows; argmax ties resolve to the lowest class id.
double accuracy(const Student& student, const Dataset& split);

// (delta_t - delta_prev) * validation_accuracy, all inputs in [0, 1].
double reward(double delta_t, double delta_prev, double validation_accuracy);

// Seed-fixed subsample of at most `cap` row indices used for the per-step
// training-accuracy signal.
std::vector<std::size_t> accuracy_subsample(std::size_t n_rows, std::size_t cap,
                                            std::uint64_t seed);

nlohmann::json student_to_json(const Student& student, double best_accuracy_so_far);
Student student_from_json(const nlohmann::json& j);

}  // namespace tutor
