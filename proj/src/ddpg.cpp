#include "tutor/ddpg.hpp"

#include <algorithm>
#include <cmath>

#include "tutor/checkpoint.hpp"
#include "tutor/error.hpp"

namespace tutor {

using nlohmann::json;

void DdpgConfig::validate() const {
    if (gamma <= 0.0 || gamma >= 1.0) throw ConfigError("DdpgConfig: gamma must lie in (0, 1)");
    if (tau <= 0.0 || tau > 1.0) throw ConfigError("DdpgConfig: tau must lie in (0, 1]");
    if (replay_batch < 1 || replay_every < 1 || update_frequency < 1) {
        throw ConfigError("DdpgConfig: replay/update periods must be >= 1");
    }
    if (buffer_capacity < replay_batch) {
        throw ConfigError("DdpgConfig: buffer capacity smaller than replay batch");
    }
    if (hidden_layers < 1 || hidden_nodes < 1) {
        throw ConfigError("DdpgConfig: teacher needs at least one hidden layer");
    }
    if (teacher_lr <= 0.0) throw ConfigError("DdpgConfig: teacher_lr must be > 0");
    if (actor_lr_scale <= 0.0) throw ConfigError("DdpgConfig: actor_lr_scale must be > 0");
    if (critic_heads != 1 && critic_heads != 2) {
        throw ConfigError("DdpgConfig: critic_heads must be 1 or 2");
    }
}

std::size_t resolve_width_max(const DdpgConfig& config, std::size_t n_train) {
    if (config.width_max > 0) return config.width_max;
    return (n_train + 9) / 10;
}

std::array<double, 2> OuNoise::sample(Rng& rng) {
    for (double& x : state) {
        x += theta * (0.0 - x) + sigma * rng.normal();
    }
    return state;
}

namespace {

DenseNetSpec teacher_net_spec(std::size_t inputs, std::size_t outputs, OutputHead head,
                              const DdpgConfig& config) {
    DenseNetSpec spec;
    spec.layer_sizes.push_back(inputs);
    for (std::size_t i = 0; i < config.hidden_layers; ++i) {
        spec.layer_sizes.push_back(config.hidden_nodes);
    }
    spec.layer_sizes.push_back(outputs);
    spec.output_head = head;
    spec.dropout_rate = config.dropout_rate;
    return spec;
}

Matrix states_to_matrix(const std::vector<std::vector<double>>& states) {
    if (states.empty()) throw PreconditionError("empty state batch");
    Matrix m(states.size(), states[0].size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (states[i].size() != m.cols()) {
            throw DimensionError("state batch has inconsistent lengths");
        }
        std::copy(states[i].begin(), states[i].end(), m.row_ptr(i));
    }
    return m;
}

// Near-zero output layer: initial actions sit mid-range and initial Q-values
// near zero, so early updates cannot slam the tanh heads into saturation.
void shrink_output_layer(DenseNet& net, Rng& rng) {
    const double bound = 1e-3;
    for (double& x : net.weights.back().data()) x = rng.uniform(-bound, bound);
    for (double& x : net.biases.back()) x = 0.0;
}

}  // namespace

DdpgTeacher::DdpgTeacher(std::size_t state_dim_in, const DdpgConfig& config_in)
    : config(config_in),
      state_dim(state_dim_in),
      buffer(config_in.buffer_capacity),
      rng(config_in.seed) {
    config.validate();
    if (state_dim < 1) throw ConfigError("DdpgTeacher: state dimension must be >= 1");
    const auto heads = static_cast<std::size_t>(config.critic_heads);
    actor = DenseNet::init(teacher_net_spec(state_dim, 2, OutputHead::Tanh, config), rng);
    critic = DenseNet::init(teacher_net_spec(state_dim + 2, heads, OutputHead::Linear, config), rng);
    shrink_output_layer(actor, rng);
    shrink_output_layer(critic, rng);
    actor_target = actor;
    critic_target = critic;
    actor_opt = SgdMomentum::create(actor, config.teacher_lr * config.actor_lr_scale,
                                    config.momentum);
    critic_opt = SgdMomentum::create(critic, config.teacher_lr, config.momentum);
    noise.theta = config.ou_theta;
    noise.sigma = config.ou_sigma;
}

Action scale_action(const std::array<double, 2>& raw, std::size_t n_train,
                    std::size_t width_max) {
    Action a;
    a.raw = {std::clamp(raw[0], -1.0, 1.0), std::clamp(raw[1], -1.0, 1.0)};
    const double center = (a.raw[0] + 1.0) / 2.0 * static_cast<double>(n_train - 1);
    const double width = (a.raw[1] + 1.0) / 2.0 * static_cast<double>(width_max);
    const long c = std::lround(center);
    const long w = std::lround(width);
    a.center_index = static_cast<std::size_t>(std::clamp<long>(c, 0, static_cast<long>(n_train - 1)));
    a.width = static_cast<std::size_t>(std::clamp<long>(w, 0, static_cast<long>(width_max)));
    return a;
}

Action act(DdpgTeacher& teacher, const std::vector<double>& state, bool explore,
           std::size_t n_train) {
    if (state.size() != teacher.state_dim) {
        throw DimensionError("act: state length does not match actor input");
    }
    Matrix input(1, state.size());
    std::copy(state.begin(), state.end(), input.row_ptr(0));
    const Matrix out = predict(teacher.actor, input);
    std::array<double, 2> raw{out.at(0, 0), out.at(0, 1)};
    if (explore) {
        const auto n = teacher.noise.sample(teacher.rng);
        raw[0] += n[0];
        raw[1] += n[1];
    }
    return scale_action(raw, n_train, resolve_width_max(teacher.config, n_train));
}

Matrix critic_targets(const std::vector<Transition>& batch, const DdpgTeacher& teacher,
                      double gamma) {
    if (batch.empty()) throw PreconditionError("critic_targets: empty batch");
    const std::size_t heads = teacher.critic.output_size();

    std::vector<std::vector<double>> next_states;
    next_states.reserve(batch.size());
    for (const auto& t : batch) next_states.push_back(t.next_state);
    const Matrix s_next = states_to_matrix(next_states);

    const Matrix a_next = predict(teacher.actor_target, s_next);
    Matrix critic_in(batch.size(), teacher.state_dim + 2);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        std::copy(batch[i].next_state.begin(), batch[i].next_state.end(), critic_in.row_ptr(i));
        critic_in.at(i, teacher.state_dim) = a_next.at(i, 0);
        critic_in.at(i, teacher.state_dim + 1) = a_next.at(i, 1);
    }
    const Matrix q_next = predict(teacher.critic_target, critic_in);

    // Episodes are fixed length, so no terminal masking applies.
    Matrix y(batch.size(), heads);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        for (std::size_t h = 0; h < heads; ++h) {
            y.at(i, h) = batch[i].reward + gamma * q_next.at(i, h);
        }
    }
    return y;
}

double train_critic(DdpgTeacher& teacher, const std::vector<Transition>& batch) {
    if (batch.empty()) throw PreconditionError("train_critic: empty batch");
    const Matrix y = critic_targets(batch, teacher, teacher.config.gamma);

    Matrix critic_in(batch.size(), teacher.state_dim + 2);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        if (batch[i].state.size() != teacher.state_dim || batch[i].action.size() != 2) {
            throw DimensionError("train_critic: transition shape mismatch");
        }
        std::copy(batch[i].state.begin(), batch[i].state.end(), critic_in.row_ptr(i));
        critic_in.at(i, teacher.state_dim) = batch[i].action[0];
        critic_in.at(i, teacher.state_dim + 1) = batch[i].action[1];
    }
    ForwardResult fwd = forward(teacher.critic, critic_in, /*train_mode=*/true, teacher.rng);
    const double loss = compute_loss(teacher.critic, fwd, y, Loss::Mse);
    if (!std::isfinite(loss)) throw NumericError("train_critic: non-finite loss");
    Gradients grads = backward(teacher.critic, fwd, y, Loss::Mse);
    sgd_step(teacher.critic_opt, teacher.critic, grads);
    return loss;
}

double train_actor(DdpgTeacher& teacher, const std::vector<std::vector<double>>& states) {
    if (states.empty()) throw PreconditionError("train_actor: empty state batch");
    const Matrix s = states_to_matrix(states);
    if (s.cols() != teacher.state_dim) {
        throw DimensionError("train_actor: state length does not match actor input");
    }
    const std::size_t m = s.rows();
    const std::size_t heads = teacher.critic.output_size();

    ForwardResult actor_fwd = forward(teacher.actor, s, /*train_mode=*/true, teacher.rng);
    const Matrix& actions = actor_fwd.output();

    Matrix critic_in(m, teacher.state_dim + 2);
    for (std::size_t i = 0; i < m; ++i) {
        std::copy(s.row_ptr(i), s.row_ptr(i) + s.cols(), critic_in.row_ptr(i));
        critic_in.at(i, teacher.state_dim) = actions.at(i, 0);
        critic_in.at(i, teacher.state_dim + 1) = actions.at(i, 1);
    }
    // The critic acts as a frozen differentiable scorer here.
    Rng eval_rng(0);
    ForwardResult critic_fwd = forward(teacher.critic, critic_in, /*train_mode=*/false, eval_rng);

    double objective = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t h = 0; h < heads; ++h) objective += critic_fwd.output().at(i, h);
    }
    objective /= static_cast<double>(m);

    // dJ/dQ = 1/m per head entry; pull the gradient back to the action slice
    // of the critic input, then through the actor.
    Matrix grad_q(m, heads, 1.0 / static_cast<double>(m));
    Gradients critic_grads = backward_from_output_grad(teacher.critic, critic_fwd, grad_q);
    Matrix grad_actions(m, 2);
    for (std::size_t i = 0; i < m; ++i) {
        grad_actions.at(i, 0) = critic_grads.input.at(i, teacher.state_dim);
        grad_actions.at(i, 1) = critic_grads.input.at(i, teacher.state_dim + 1);
    }
    Gradients actor_grads = backward_from_output_grad(teacher.actor, actor_fwd, grad_actions);

    // Ascend: step along +grad by negating before the descent update.
    for (auto& w : actor_grads.weights) w.scale(-1.0);
    for (auto& b : actor_grads.biases) {
        for (double& x : b) x = -x;
    }
    sgd_step(teacher.actor_opt, teacher.actor, actor_grads);
    return objective;
}

void soft_update(DenseNet& target, const DenseNet& online, double tau) {
    if (tau < 0.0 || tau > 1.0) throw PreconditionError("soft_update: tau must lie in [0, 1]");
    if (target.weights.size() != online.weights.size()) {
        throw DimensionError("soft_update: layer counts disagree");
    }
    for (std::size_t k = 0; k < target.weights.size(); ++k) {
        if (!target.weights[k].same_shape(online.weights[k])) {
            throw DimensionError("soft_update: weight shapes disagree");
        }
        for (std::size_t i = 0; i < target.weights[k].size(); ++i) {
            double& t = target.weights[k].data()[i];
            t = tau * online.weights[k].data()[i] + (1.0 - tau) * t;
        }
        for (std::size_t j = 0; j < target.biases[k].size(); ++j) {
            double& t = target.biases[k][j];
            t = tau * online.biases[k][j] + (1.0 - tau) * t;
        }
    }
}

std::vector<double> perturb_state(const std::vector<double>& state, double sigma, Rng& rng) {
    if (sigma < 0.0) throw PreconditionError("perturb_state: sigma must be >= 0");
    std::vector<double> out = state;
    if (sigma == 0.0) return out;
    for (double& x : out) x += rng.normal(0.0, sigma);
    return out;
}

namespace {

void decay_noise(DdpgTeacher& teacher, std::size_t step, std::size_t total_planned) {
    if (total_planned == 0) return;
    const double half = static_cast<double>(total_planned) / 2.0;
    const double frac = std::min(1.0, static_cast<double>(step) / std::max(1.0, half));
    teacher.noise.sigma =
        teacher.config.ou_sigma + (teacher.config.ou_sigma_end - teacher.config.ou_sigma) * frac;
}

void replay_update_round(DdpgTeacher& teacher) {
    const std::size_t m = teacher.config.replay_batch;
    if (teacher.buffer.size() < m) return;  // not enough data yet, skip

    auto run_update = [&](const std::vector<Transition>& batch) {
        train_critic(teacher, batch);
        std::vector<std::vector<double>> states;
        states.reserve(batch.size());
        for (const auto& t : batch) states.push_back(t.state);
        train_actor(teacher, states);
        ++teacher.update_count;
        if (teacher.update_count % teacher.config.update_frequency == 0) {
            soft_update(teacher.critic_target, teacher.critic, teacher.config.tau);
            soft_update(teacher.actor_target, teacher.actor, teacher.config.tau);
        }
    };

    // Most recent experience first, then a uniform sample of history.
    run_update(teacher.buffer.recent(m));
    if (auto sample = teacher.buffer.try_sample(m, teacher.rng)) {
        run_update(*sample);
    }
}

}  // namespace

EpisodeResult run_episode(DdpgTeacher& teacher, Student& student, const TaskData& task,
                          const BatchPlan& plan, const EpisodeOptions& options) {
    if (options.iterations < 1) throw PreconditionError("run_episode: iterations must be >= 1");
    if (plan.size() != task.train.n_rows()) {
        throw PreconditionError("run_episode: plan does not cover the training set");
    }
    const std::size_t n_train = task.train.n_rows();
    const ReferenceVector refs = ReferenceVector::for_student(student);

    const auto sub_idx =
        accuracy_subsample(n_train, options.accuracy_subsample_cap, options.subsample_seed);
    const Dataset delta_split = task.train.select_rows(sub_idx);

    EpisodeResult result;
    result.best_test_acc = -1.0;
    result.best_val_acc = -1.0;
    double delta_prev = accuracy(student, delta_split);

    for (std::size_t i = 0; i < options.iterations; ++i) {
        decay_noise(teacher, teacher.global_step, options.total_planned_steps);

        const std::vector<double> state = encode_state(student, refs);
        Action action = act(teacher, state, options.explore, n_train);
        if (options.constrained && teacher.rng.bernoulli(options.constrain_prob)) {
            action.raw[1] = -1.0;
            action.width = 0;
        }

        const auto window = slice_window(plan, action.center_index, action.width);
        train_on_indices(student, task.train, window);

        const double delta_t = accuracy(student, delta_split);
        const double val_acc = accuracy(student, task.validation);
        double r = reward(delta_t, delta_prev, val_acc);
        if (options.reward_hook) r = options.reward_hook(action, r);

        const std::vector<double> next_state = encode_state(student, refs);
        teacher.buffer.push({state, {action.raw[0], action.raw[1]}, r, next_state});
        ++teacher.global_step;

        if (options.update_teacher && (i + 1) % teacher.config.replay_every == 0) {
            replay_update_round(teacher);
        }

        const double test_acc = accuracy(student, task.test);
        IterationRecord rec;
        rec.student_id = options.student_id;
        rec.iter = i;
        rec.center = action.center_index;
        rec.width = action.width;
        rec.reward = r;
        rec.train_acc = delta_t;
        rec.val_acc = val_acc;
        rec.test_acc = test_acc;
        rec.mode = options.mode_label;
        result.records.push_back(std::move(rec));

        if (test_acc > result.best_test_acc) {
            result.best_test_acc = test_acc;
            result.best_iter = i;
            result.best_net = student.net;
        }
        if (val_acc > result.best_val_acc) {
            result.best_val_acc = val_acc;
            result.best_val_iter = i;
            result.best_val_net = student.net;
        }
        delta_prev = delta_t;
    }
    return result;
}

TeacherSummary train_teacher(DdpgTeacher& teacher, const StudentConfig& student_config,
                             const TaskData& task, const BatchPlan& plan, std::size_t n_students,
                             std::size_t iterations, const EpisodeOptions& base_options) {
    if (n_students < 1 || iterations < 1) {
        throw PreconditionError("train_teacher: students and iterations must be >= 1");
    }
    TeacherSummary summary;
    for (std::size_t x = 0; x < n_students; ++x) {
        StudentConfig cfg = student_config;
        cfg.seed = student_config.seed + x;
        Student student = init_student(cfg, task.train.n_features(), task.train.n_classes);
        teacher.noise.reset();

        EpisodeOptions options = base_options;
        options.iterations = iterations;
        options.student_id = x;
        options.total_planned_steps = base_options.total_planned_steps > 0
                                          ? base_options.total_planned_steps
                                          : n_students * iterations;
        EpisodeResult ep = run_episode(teacher, student, task, plan, options);
        summary.per_student_best.push_back(ep.best_test_acc);
        summary.records.insert(summary.records.end(), ep.records.begin(), ep.records.end());
    }
    return summary;
}

json ddpg_to_json(const DdpgTeacher& teacher) {
    json j;
    j["format_version"] = kCheckpointFormatVersion;
    j["kind"] = "ddpg";
    j["config"] = {{"gamma", teacher.config.gamma},
                   {"tau", teacher.config.tau},
                   {"update_frequency", teacher.config.update_frequency},
                   {"replay_batch", teacher.config.replay_batch},
                   {"replay_every", teacher.config.replay_every},
                   {"buffer_capacity", teacher.config.buffer_capacity},
                   {"hidden_layers", teacher.config.hidden_layers},
                   {"hidden_nodes", teacher.config.hidden_nodes},
                   {"dropout_rate", teacher.config.dropout_rate},
                   {"momentum", teacher.config.momentum},
                   {"teacher_lr", teacher.config.teacher_lr},
                   {"actor_lr_scale", teacher.config.actor_lr_scale},
                   {"ou_theta", teacher.config.ou_theta},
                   {"ou_sigma", teacher.config.ou_sigma},
                   {"ou_sigma_end", teacher.config.ou_sigma_end},
                   {"width_max", teacher.config.width_max},
                   {"critic_heads", teacher.config.critic_heads},
                   {"seed", teacher.config.seed}};
    j["state_dim"] = teacher.state_dim;
    j["actor"] = net_to_json(teacher.actor);
    j["actor_target"] = net_to_json(teacher.actor_target);
    j["critic"] = net_to_json(teacher.critic);
    j["critic_target"] = net_to_json(teacher.critic_target);
    j["actor_opt"] = optimizer_to_json(teacher.actor_opt);
    j["critic_opt"] = optimizer_to_json(teacher.critic_opt);
    j["noise_state"] = teacher.noise.state;
    j["noise_sigma"] = teacher.noise.sigma;
    j["update_count"] = teacher.update_count;
    j["global_step"] = teacher.global_step;
    return j;
}

DdpgTeacher ddpg_from_json(const json& j) {
    if (j.at("kind").get<std::string>() != "ddpg") {
        throw IoError("checkpoint kind is not 'ddpg'");
    }
    DdpgConfig cfg;
    const json& jc = j.at("config");
    cfg.gamma = jc.at("gamma").get<double>();
    cfg.tau = jc.at("tau").get<double>();
    cfg.update_frequency = jc.at("update_frequency").get<std::size_t>();
    cfg.replay_batch = jc.at("replay_batch").get<std::size_t>();
    cfg.replay_every = jc.at("replay_every").get<std::size_t>();
    cfg.buffer_capacity = jc.at("buffer_capacity").get<std::size_t>();
    cfg.hidden_layers = jc.at("hidden_layers").get<std::size_t>();
    cfg.hidden_nodes = jc.at("hidden_nodes").get<std::size_t>();
    cfg.dropout_rate = jc.at("dropout_rate").get<double>();
    cfg.momentum = jc.at("momentum").get<double>();
    cfg.teacher_lr = jc.at("teacher_lr").get<double>();
    cfg.actor_lr_scale = jc.at("actor_lr_scale").get<double>();
    cfg.ou_theta = jc.at("ou_theta").get<double>();
    cfg.ou_sigma = jc.at("ou_sigma").get<double>();
    cfg.ou_sigma_end = jc.at("ou_sigma_end").get<double>();
    cfg.width_max = jc.at("width_max").get<std::size_t>();
    cfg.critic_heads = jc.at("critic_heads").get<int>();
    cfg.seed = jc.at("seed").get<std::uint64_t>();

    DdpgTeacher teacher(j.at("state_dim").get<std::size_t>(), cfg);
    teacher.actor = net_from_json(j.at("actor"));
    teacher.actor_target = net_from_json(j.at("actor_target"));
    teacher.critic = net_from_json(j.at("critic"));
    teacher.critic_target = net_from_json(j.at("critic_target"));
    teacher.actor_opt = optimizer_from_json(j.at("actor_opt"), teacher.actor);
    teacher.critic_opt = optimizer_from_json(j.at("critic_opt"), teacher.critic);
    const auto ns = j.at("noise_state").get<std::vector<double>>();
    if (ns.size() != 2) throw IoError("checkpoint: bad noise state");
    teacher.noise.state = {ns[0], ns[1]};
    teacher.noise.sigma = j.at("noise_sigma").get<double>();
    teacher.update_count = j.at("update_count").get<std::size_t>();
    teacher.global_step = j.at("global_step").get<std::size_t>();
    return teacher;
}

}  // namespace tutor
