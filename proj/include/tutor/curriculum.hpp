#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tutor/dataset.hpp"
#include "tutor/matrix.hpp"
#include "tutor/net.hpp"
#include "tutor/rng.hpp"

#include <json.hpp>

namespace tutor {

struct DaeConfig {
    std::size_t latent_dim = 8;
    double noise = 0.2;  // masking fraction applied to inputs during training
    std::size_t epochs = 30;
    double learning_rate = 0.01;
    std::size_t hidden = 32;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;

    void validate() const;
};

// Trains a denoising autoencoder on the (already standardized) features and
// returns the encoder half (input -> latent, linear head). Also reports the
// reconstruction MSE on clean inputs before and after training.
struct DaeResult {
    DenseNet encoder;
    double initial_mse = 0.0;
    double final_mse = 0.0;
};

DaeResult train_dae(const Matrix& features, const DaeConfig& config);

// Mean / covariance summary of a sample with a Cholesky factor of S + ridge*I
// so distances are evaluated by triangular solves, never an explicit inverse.
class MomentModel {
public:
    MomentModel(std::vector<double> mean, Matrix covariance, double ridge);

    const std::vector<double>& mean() const { return mean_; }
    const Matrix& covariance() const { return covariance_; }
    double ridge() const { return ridge_; }
    std::size_t dim() const { return mean_.size(); }

    double mahalanobis(const std::vector<double>& x) const;

private:
    std::vector<double> mean_;
    Matrix covariance_;
    double ridge_ = 0.0;
    Matrix chol_;  // lower-triangular factor of covariance + ridge*I
};

// Column means plus sample covariance (divisor n-1).
MomentModel fit_moments(const Matrix& latent, double ridge);

// Default ridge used by the pipeline: 1e-6 * trace(S) / dim.
double default_ridge(const Matrix& latent);

std::vector<double> mahalanobis_scores(const Matrix& latent, const MomentModel& model);

// score_i = 1 - cos(x_i, reference); zero-norm rows score 1.
std::vector<double> cosine_scores(const Matrix& features, const std::vector<double>& reference);

enum class BatchMode { Disjoint, Cumulative };

std::string to_string(BatchMode mode);
BatchMode batch_mode_from_string(const std::string& s);

// A permutation of training indices sorted ascending by difficulty score,
// partitioned into n_batches either as disjoint contiguous chunks or as
// cumulative supersets ending at the full set.
class BatchPlan {
public:
    BatchPlan(std::vector<double> scores, std::size_t n_batches, BatchMode mode);

    std::size_t size() const { return order_.size(); }
    std::size_t n_batches() const { return n_batches_; }
    BatchMode mode() const { return mode_; }
    const std::vector<std::size_t>& order() const { return order_; }
    const std::vector<double>& scores() const { return scores_; }

    // Index set of batch i (dataset row indices, not positions).
    std::vector<std::size_t> batch(std::size_t i) const;

    nlohmann::json to_json() const;
    static BatchPlan from_json(const nlohmann::json& j);

private:
    BatchPlan() = default;
    std::vector<double> scores_;        // per original index
    std::vector<std::size_t> order_;    // ascending by score, stable ties
    std::size_t n_batches_ = 1;
    BatchMode mode_ = BatchMode::Disjoint;
};

// Window of the sorted order centred (at offset floor(w/2)) on position
// `center`, length w, clamped at the ends; w = 0 yields the single point.
// Returns dataset row indices.
std::vector<std::size_t> slice_window(const BatchPlan& plan, std::size_t center, std::size_t width);

}  // namespace tutor
