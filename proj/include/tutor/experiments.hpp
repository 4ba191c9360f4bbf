#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tutor/config.hpp"
#include "tutor/curriculum.hpp"
#include "tutor/dataset.hpp"
#include "tutor/ddpg.hpp"
#include "tutor/dqn.hpp"

#include <json.hpp>

namespace tutor {

// Gaussian clusters with unit-spaced means along the diagonal direction and
// per-coordinate standard deviation `spread`.
Dataset synth_blobs(std::size_t n_classes, std::size_t n_per_class, std::size_t dim,
                    double spread, std::uint64_t seed);

// Stratified split into train/validation/test; optionally downsamples the
// train split to equal per-class counts. Validation and test keep the
// original class proportions.
TaskData split(const Dataset& dataset, const SplitSpec& spec, std::uint64_t seed);

// Dataset -> splits -> standardized features -> difficulty scores -> plan.
struct Pipeline {
    TaskData task;  // standardized features
    BatchPlan plan;
    std::vector<double> scores;       // per train row
    nlohmann::json metadata;          // scorer, DAE reconstruction numbers
};

Pipeline build_pipeline(const ExperimentConfig& cfg);

// Uniform-random mini-batch training with the same logging as teacher runs.
EpisodeResult baseline_batchwise(const StudentConfig& student_config, const TaskData& task,
                                 std::size_t batch_size, std::size_t steps, std::uint64_t seed,
                                 std::size_t subsample_cap, std::uint64_t subsample_seed);

// Presents curriculum batches in order with an equal step budget per batch.
EpisodeResult baseline_curriculum(const StudentConfig& student_config, const TaskData& task,
                                  const BatchPlan& plan, std::size_t steps,
                                  std::size_t subsample_cap, std::uint64_t subsample_seed);

struct RunOutcome {
    std::string out_dir;
    std::string runlog_path;
    double best_test_acc = 0.0;
    std::size_t best_iter = 0;
    nlohmann::json summary;
};

// Dispatches an experiment, writes the run log plus artifacts under
// cfg.out_dir, and returns the headline numbers.
RunOutcome run(const ExperimentConfig& cfg);

}  // namespace tutor
