#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tutor/curriculum.hpp"
#include "tutor/dataset.hpp"
#include "tutor/net.hpp"
#include "tutor/replay.hpp"
#include "tutor/rng.hpp"
#include "tutor/student.hpp"

#include <json.hpp>

namespace tutor {

struct DdpgConfig {
    double gamma = 0.95;
    double tau = 0.005;
    std::size_t update_frequency = 20;  // soft-update targets every U online updates
    std::size_t replay_batch = 10;      // m
    std::size_t replay_every = 10;      // environment steps between update rounds
    std::size_t buffer_capacity = 1000000;
    std::size_t hidden_layers = 3;
    std::size_t hidden_nodes = 50;
    double dropout_rate = 0.2;
    double momentum = 0.9;
    double teacher_lr = 0.01;
    // The actor steps at teacher_lr * actor_lr_scale; a slower actor keeps
    // the tanh outputs out of their flat saturation region.
    double actor_lr_scale = 0.1;
    double ou_theta = 0.15;
    double ou_sigma = 0.2;
    double ou_sigma_end = 0.02;  // sigma decays linearly to this over the first half of a run
    std::size_t width_max = 0;   // 0 -> ceil(n_train / 10)
    int critic_heads = 2;        // one Q head per action coordinate; 1 = scalar critic
    std::uint64_t seed = 0;

    void validate() const;
};

std::size_t resolve_width_max(const DdpgConfig& config, std::size_t n_train);

// Mean-reverting exploration noise on the two raw action coordinates.
struct OuNoise {
    double theta = 0.15;
    double sigma = 0.2;
    std::array<double, 2> state{0.0, 0.0};

    void reset() { state = {0.0, 0.0}; }
    std::array<double, 2> sample(Rng& rng);
};

struct Action {
    std::array<double, 2> raw{0.0, 0.0};  // in [-1, 1]^2
    std::size_t center_index = 0;         // in [0, n_train)
    std::size_t width = 0;                // in [0, width_max]
};

// Actor/critic pair with target copies. The critic consumes state + raw
// action and emits one Q head per action coordinate.
struct DdpgTeacher {
    DdpgConfig config;
    std::size_t state_dim = 0;
    DenseNet actor, actor_target;
    DenseNet critic, critic_target;
    SgdMomentum actor_opt, critic_opt;
    ReplayBuffer buffer;
    OuNoise noise;
    Rng rng;
    std::size_t update_count = 0;  // online (non-target) update rounds so far
    std::size_t global_step = 0;   // environment steps across all students

    DdpgTeacher(std::size_t state_dim, const DdpgConfig& config);
};

// raw = clamp(tanh-actor(state) + noise, [-1,1]^2); noise only when exploring.
Action act(DdpgTeacher& teacher, const std::vector<double>& state, bool explore,
           std::size_t n_train);

// Affine map from raw coordinates to (center index, window width).
Action scale_action(const std::array<double, 2>& raw, std::size_t n_train,
                    std::size_t width_max);

// y_i = r_i + gamma * Q_T(s'_i, mu_T(s'_i)), one column per head. Targets are
// a value matrix; no gradients flow through them.
Matrix critic_targets(const std::vector<Transition>& batch, const DdpgTeacher& teacher,
                      double gamma);

// One SGD-momentum step minimising the mean squared error between the critic
// outputs and the bootstrap targets. Returns the loss.
double train_critic(DdpgTeacher& teacher, const std::vector<Transition>& batch);

// One ascent step on mean_i sum_heads Q(s_i, mu(s_i)); the gradient reaches
// the actor through the action slice of the critic input. Critic parameters
// stay untouched. Returns the objective value.
double train_actor(DdpgTeacher& teacher, const std::vector<std::vector<double>>& states);

// target <- tau * online + (1 - tau) * target, exactly.
void soft_update(DenseNet& target, const DenseNet& online, double tau);

// Adds iid N(0, sigma^2) to every entry.
std::vector<double> perturb_state(const std::vector<double>& state, double sigma, Rng& rng);

struct IterationRecord {
    std::size_t student_id = 0;
    std::size_t iter = 0;
    std::size_t center = 0;
    std::size_t width = 0;
    int action_id = -1;  // DQN teachers only
    double reward = 0.0;
    double train_acc = 0.0;
    double val_acc = 0.0;
    double test_acc = 0.0;
    double epsilon = 0.0;  // DQN teachers only
    std::string mode;
};

struct EpisodeOptions {
    std::size_t iterations = 100;  // I
    bool explore = true;
    bool update_teacher = true;
    bool constrained = false;    // force width 0 with probability constrain_prob
    double constrain_prob = 0.999;
    std::size_t total_planned_steps = 0;  // 0 disables noise decay
    std::size_t student_id = 0;
    std::string mode_label = "train";
    std::size_t accuracy_subsample_cap = 1024;
    std::uint64_t subsample_seed = 0;
    // Test hook: overrides the observed reward (arguments: action, observed).
    std::function<double(const Action&, double)> reward_hook;
};

struct EpisodeResult {
    std::vector<IterationRecord> records;
    double best_test_acc = 0.0;
    std::size_t best_iter = 0;
    DenseNet best_net;  // student weights at the best test accuracy
    double best_val_acc = 0.0;
    std::size_t best_val_iter = 0;
    DenseNet best_val_net;  // student weights at the best validation accuracy
};

// Algorithm inner loop: encode state, pick a window, train the student on it,
// reward the accuracy improvement scaled by validation accuracy, store the
// transition, and periodically update critic/actor from recent + replayed
// experience with soft target updates.
EpisodeResult run_episode(DdpgTeacher& teacher, Student& student, const TaskData& task,
                          const BatchPlan& plan, const EpisodeOptions& options);

struct TeacherSummary {
    std::vector<double> per_student_best;  // best test accuracy per student
    std::vector<IterationRecord> records;
};

// Outer loop: X fresh students trained sequentially, one replay buffer shared
// across all of them.
TeacherSummary train_teacher(DdpgTeacher& teacher, const StudentConfig& student_config,
                             const TaskData& task, const BatchPlan& plan, std::size_t n_students,
                             std::size_t iterations, const EpisodeOptions& base_options);

nlohmann::json ddpg_to_json(const DdpgTeacher& teacher);
DdpgTeacher ddpg_from_json(const nlohmann::json& j);

}  // namespace tutor
