#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tutor/curriculum.hpp"
#include "tutor/ddpg.hpp"  // TaskData, IterationRecord, EpisodeResult
#include "tutor/net.hpp"
#include "tutor/replay.hpp"
#include "tutor/rng.hpp"
#include "tutor/student.hpp"

#include <json.hpp>

namespace tutor {

struct DqnConfig {
    std::size_t n_actions = 100;  // one action per curriculum batch
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    std::size_t sync_period = 10;  // M: replay batch size and target/replay period
    double gamma = 0.95;
    std::size_t hidden_layers = 3;
    std::size_t hidden_nodes = 50;
    double dropout_rate = 0.2;
    double momentum = 0.9;
    double teacher_lr = 0.01;
    std::size_t buffer_capacity = 1000000;
    std::uint64_t seed = 0;

    void validate() const;
};

struct DqnTeacher {
    DqnConfig config;
    std::size_t state_dim = 0;
    DenseNet online;
    DenseNet target;
    SgdMomentum opt;
    ReplayBuffer buffer;
    Rng rng;
    std::size_t global_step = 0;

    DqnTeacher(std::size_t state_dim, const DqnConfig& config);
};

// Linear decay: eps_start + (eps_end - eps_start) * i / horizon.
double epsilon_at(std::size_t i, std::size_t horizon, const DqnConfig& config);

// Epsilon-greedy over the N batch Q-values; greedy ties resolve to the
// lowest action id.
std::size_t select_batch(const DenseNet& qnet, const std::vector<double>& state, double epsilon,
                         std::size_t n_actions, Rng& rng);

// Transitions for the DQN teacher store the action id in action[0].
Transition make_dqn_transition(std::vector<double> state, std::size_t action_id, double reward,
                               std::vector<double> next_state);

// TD update on the taken action's head only; the other heads' targets equal
// the current predictions so their gradients vanish. Returns the mean squared
// TD error over the batch.
double dqn_update(DqnTeacher& teacher, const std::vector<Transition>& batch);

// Hard copy of the online network into the target network.
void target_sync(DqnTeacher& teacher);

struct DqnEpisodeOptions {
    std::size_t iterations = 100;  // I (also the epsilon decay horizon)
    bool explore = true;           // when false epsilon is pinned to 0
    bool update_teacher = true;
    std::size_t student_id = 0;
    std::string mode_label = "train";
    std::size_t accuracy_subsample_cap = 1024;
    std::uint64_t subsample_seed = 0;
    // Test hook: overrides the observed reward (arguments: action id, observed).
    std::function<double(std::size_t, double)> reward_hook;
};

// Discrete-action episode: first iteration trains on a uniformly random
// batch; afterwards actions come from the epsilon-greedy policy. Every step
// runs a batch-1 TD update on the newest transition; every M steps a replay
// batch of M is trained on and the target is synced.
EpisodeResult run_episode_dqn(DqnTeacher& teacher, Student& student, const TaskData& task,
                              const BatchPlan& plan, const DqnEpisodeOptions& options);

TeacherSummary train_teacher_dqn(DqnTeacher& teacher, const StudentConfig& student_config,
                                 const TaskData& task, const BatchPlan& plan,
                                 std::size_t n_students, std::size_t iterations,
                                 const DqnEpisodeOptions& base_options);

nlohmann::json dqn_to_json(const DqnTeacher& teacher);
DqnTeacher dqn_from_json(const nlohmann::json& j);

}  // namespace tutor
