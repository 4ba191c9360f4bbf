#include "tutor/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tutor/error.hpp"

namespace tutor {

using nlohmann::json;

void DaeConfig::validate() const {
    if (latent_dim < 1) throw ConfigError("DaeConfig: latent_dim must be >= 1");
    if (epochs < 1) throw ConfigError("DaeConfig: epochs must be >= 1");
    if (noise < 0.0 || noise >= 1.0) throw ConfigError("DaeConfig: noise must lie in [0, 1)");
    if (learning_rate <= 0.0) throw ConfigError("DaeConfig: learning_rate must be > 0");
    if (hidden < 1 || batch_size < 1) throw ConfigError("DaeConfig: hidden/batch_size must be >= 1");
}

namespace {

double reconstruction_mse(const DenseNet& encoder, const DenseNet& decoder, const Matrix& x) {
    const Matrix recon = predict(decoder, predict(encoder, x));
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = recon.data()[i] - x.data()[i];
        total += d * d;
    }
    return total / static_cast<double>(x.size());
}

}  // namespace

DaeResult train_dae(const Matrix& features, const DaeConfig& config) {
    config.validate();
    if (features.rows() == 0) throw PreconditionError("train_dae: empty dataset");

    // Degenerate data has nothing to reconstruct.
    bool any_variance = false;
    const auto means = features.column_means();
    for (std::size_t j = 0; j < features.cols() && !any_variance; ++j) {
        for (std::size_t i = 0; i < features.rows(); ++i) {
            if (std::abs(features.at(i, j) - means[j]) > 1e-12) {
                any_variance = true;
                break;
            }
        }
    }
    if (!any_variance) {
        throw ConfigError("train_dae: all features have zero variance");
    }

    const std::size_t d = features.cols();
    Rng rng(config.seed);

    DenseNetSpec enc_spec{{d, config.hidden, config.latent_dim}, OutputHead::Linear, 0.0};
    DenseNetSpec dec_spec{{config.latent_dim, config.hidden, d}, OutputHead::Linear, 0.0};
    DenseNet encoder = DenseNet::init(enc_spec, rng);
    DenseNet decoder = DenseNet::init(dec_spec, rng);
    SgdMomentum enc_opt = SgdMomentum::create(encoder, config.learning_rate, 0.9);
    SgdMomentum dec_opt = SgdMomentum::create(decoder, config.learning_rate, 0.9);

    DaeResult result;
    result.initial_mse = reconstruction_mse(encoder, decoder, features);

    std::vector<std::size_t> row_order(features.rows());
    std::iota(row_order.begin(), row_order.end(), 0);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(row_order);
        for (std::size_t start = 0; start < row_order.size(); start += config.batch_size) {
            const std::size_t count = std::min(config.batch_size, row_order.size() - start);
            Matrix clean(count, d);
            for (std::size_t i = 0; i < count; ++i) {
                const double* src = features.row_ptr(row_order[start + i]);
                std::copy(src, src + d, clean.row_ptr(i));
            }
            Matrix corrupted = clean;
            if (config.noise > 0.0) {
                for (double& x : corrupted.data()) {
                    if (rng.bernoulli(config.noise)) x = 0.0;
                }
            }
            ForwardResult enc_fwd = forward(encoder, corrupted, /*train_mode=*/true, rng);
            ForwardResult dec_fwd = forward(decoder, enc_fwd.output(), /*train_mode=*/true, rng);
            Gradients dec_grads = backward(decoder, dec_fwd, clean, Loss::Mse);
            Gradients enc_grads = backward_from_output_grad(encoder, enc_fwd, dec_grads.input);
            sgd_step(dec_opt, decoder, dec_grads);
            sgd_step(enc_opt, encoder, enc_grads);
        }
    }

    result.final_mse = reconstruction_mse(encoder, decoder, features);
    result.encoder = std::move(encoder);
    return result;
}

MomentModel::MomentModel(std::vector<double> mean, Matrix covariance, double ridge)
    : mean_(std::move(mean)), covariance_(std::move(covariance)), ridge_(ridge) {
    const std::size_t d = mean_.size();
    if (covariance_.rows() != d || covariance_.cols() != d) {
        throw DimensionError("MomentModel: covariance shape does not match mean");
    }
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            if (std::abs(covariance_.at(i, j) - covariance_.at(j, i)) > 1e-9) {
                throw NumericError("MomentModel: covariance is not symmetric");
            }
        }
    }
    // Cholesky of S + ridge*I.
    chol_ = Matrix(d, d);
    Matrix a = covariance_;
    for (std::size_t i = 0; i < d; ++i) a.at(i, i) += ridge_;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = a.at(i, j);
            for (std::size_t k = 0; k < j; ++k) sum -= chol_.at(i, k) * chol_.at(j, k);
            if (i == j) {
                if (sum <= 0.0) {
                    throw NumericError(
                        "MomentModel: covariance + ridge*I is not positive definite "
                        "(pivot " + std::to_string(sum) + " at " + std::to_string(i) + ")");
                }
                chol_.at(i, i) = std::sqrt(sum);
            } else {
                chol_.at(i, j) = sum / chol_.at(j, j);
            }
        }
    }
}

double MomentModel::mahalanobis(const std::vector<double>& x) const {
    if (x.size() != mean_.size()) {
        throw DimensionError("mahalanobis: vector length does not match model dimension");
    }
    // Solve L y = (x - mean); distance is ||y||.
    const std::size_t d = mean_.size();
    std::vector<double> y(d);
    for (std::size_t i = 0; i < d; ++i) {
        double sum = x[i] - mean_[i];
        for (std::size_t k = 0; k < i; ++k) sum -= chol_.at(i, k) * y[k];
        y[i] = sum / chol_.at(i, i);
    }
    double sq = 0.0;
    for (double v : y) sq += v * v;
    return std::sqrt(sq);
}

MomentModel fit_moments(const Matrix& latent, double ridge) {
    if (latent.rows() < 2) throw PreconditionError("fit_moments: need at least 2 rows");
    const std::size_t d = latent.cols();
    std::vector<double> mean = latent.column_means();
    Matrix cov(d, d);
    for (std::size_t r = 0; r < latent.rows(); ++r) {
        const double* row = latent.row_ptr(r);
        for (std::size_t i = 0; i < d; ++i) {
            const double di = row[i] - mean[i];
            for (std::size_t j = i; j < d; ++j) {
                cov.at(i, j) += di * (row[j] - mean[j]);
            }
        }
    }
    const double denom = static_cast<double>(latent.rows() - 1);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i; j < d; ++j) {
            cov.at(i, j) /= denom;
            cov.at(j, i) = cov.at(i, j);
        }
    }
    return MomentModel(std::move(mean), std::move(cov), ridge);
}

double default_ridge(const Matrix& latent) {
    if (latent.rows() < 2 || latent.cols() == 0) return 1e-9;
    const std::vector<double> mean = latent.column_means();
    double trace = 0.0;
    for (std::size_t j = 0; j < latent.cols(); ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < latent.rows(); ++i) {
            const double d = latent.at(i, j) - mean[j];
            acc += d * d;
        }
        trace += acc / static_cast<double>(latent.rows() - 1);
    }
    const double ridge = 1e-6 * trace / static_cast<double>(latent.cols());
    return ridge > 0.0 ? ridge : 1e-9;
}

std::vector<double> mahalanobis_scores(const Matrix& latent, const MomentModel& model) {
    std::vector<double> scores(latent.rows());
    for (std::size_t i = 0; i < latent.rows(); ++i) {
        scores[i] = model.mahalanobis(latent.row(i));
    }
    return scores;
}

std::vector<double> cosine_scores(const Matrix& features, const std::vector<double>& reference) {
    if (reference.size() != features.cols()) {
        throw DimensionError("cosine_scores: reference length does not match features");
    }
    const double ref_norm = norm(reference);
    if (ref_norm < 1e-12) throw PreconditionError("cosine_scores: reference must be nonzero");
    std::vector<double> scores(features.rows());
    for (std::size_t i = 0; i < features.rows(); ++i) {
        const double* row = features.row_ptr(i);
        double d = 0.0, nn = 0.0;
        for (std::size_t j = 0; j < features.cols(); ++j) {
            d += row[j] * reference[j];
            nn += row[j] * row[j];
        }
        const double row_norm = std::sqrt(nn);
        // Zero rows have no direction; score them as orthogonal.
        scores[i] = row_norm < 1e-12 ? 1.0 : 1.0 - d / (row_norm * ref_norm);
    }
    return scores;
}

std::string to_string(BatchMode mode) {
    return mode == BatchMode::Disjoint ? "disjoint" : "cumulative";
}

BatchMode batch_mode_from_string(const std::string& s) {
    if (s == "disjoint") return BatchMode::Disjoint;
    if (s == "cumulative") return BatchMode::Cumulative;
    throw ConfigError("unknown batch mode: " + s);
}

BatchPlan::BatchPlan(std::vector<double> scores, std::size_t n_batches, BatchMode mode)
    : scores_(std::move(scores)), n_batches_(n_batches), mode_(mode) {
    if (n_batches_ < 1) throw ConfigError("BatchPlan: need at least one batch");
    if (n_batches_ > scores_.size()) {
        throw ConfigError("BatchPlan: more batches than datapoints");
    }
    order_.resize(scores_.size());
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
        return scores_[a] < scores_[b];
    });
}

std::vector<std::size_t> BatchPlan::batch(std::size_t i) const {
    if (i >= n_batches_) throw BoundsError("BatchPlan::batch: index out of range");
    const std::size_t n = order_.size();
    // Boundary b_i = ceil((i+1) * n / N); chunk sizes differ by at most one.
    auto boundary = [&](std::size_t k) { return ((k + 1) * n + n_batches_ - 1) / n_batches_; };
    const std::size_t hi = boundary(i);
    const std::size_t lo = (mode_ == BatchMode::Cumulative || i == 0) ? 0 : boundary(i - 1);
    return std::vector<std::size_t>(order_.begin() + static_cast<std::ptrdiff_t>(lo),
                                    order_.begin() + static_cast<std::ptrdiff_t>(hi));
}

json BatchPlan::to_json() const {
    return json{{"mode", to_string(mode_)},
                {"n_batches", n_batches_},
                {"order", order_},
                {"scores", scores_}};
}

BatchPlan BatchPlan::from_json(const json& j) {
    BatchPlan plan(j.at("scores").get<std::vector<double>>(),
                   j.at("n_batches").get<std::size_t>(),
                   batch_mode_from_string(j.at("mode").get<std::string>()));
    // The stored order must match what the scores imply.
    const auto order = j.at("order").get<std::vector<std::size_t>>();
    if (order != plan.order_) {
        throw IoError("BatchPlan: stored order is inconsistent with scores");
    }
    return plan;
}

std::vector<std::size_t> slice_window(const BatchPlan& plan, std::size_t center,
                                      std::size_t width) {
    const std::size_t n = plan.size();
    if (center >= n) throw BoundsError("slice_window: center out of range");
    if (width == 0) return {plan.order()[center]};
    const std::size_t lo = center >= width / 2 ? center - width / 2 : 0;
    const std::size_t hi = std::min(n - 1, center + (width + 1) / 2 - 1);
    std::vector<std::size_t> out;
    out.reserve(hi - lo + 1);
    for (std::size_t p = lo; p <= hi; ++p) out.push_back(plan.order()[p]);
    return out;
}

}  // namespace tutor
