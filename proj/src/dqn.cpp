#include "tutor/dqn.hpp"

#include <algorithm>
#include <cmath>

#include "tutor/checkpoint.hpp"
#include "tutor/error.hpp"

namespace tutor {

using nlohmann::json;

void DqnConfig::validate() const {
    if (n_actions < 1) throw ConfigError("DqnConfig: need at least one action");
    if (epsilon_start < 0.0 || epsilon_start > 1.0 || epsilon_end < 0.0 ||
        epsilon_end > epsilon_start) {
        throw ConfigError("DqnConfig: need 0 <= epsilon_end <= epsilon_start <= 1");
    }
    if (sync_period < 1) throw ConfigError("DqnConfig: sync_period must be >= 1");
    if (gamma <= 0.0 || gamma >= 1.0) throw ConfigError("DqnConfig: gamma must lie in (0, 1)");
    if (teacher_lr <= 0.0) throw ConfigError("DqnConfig: teacher_lr must be > 0");
    if (buffer_capacity < sync_period) {
        throw ConfigError("DqnConfig: buffer capacity smaller than replay batch");
    }
}

DqnTeacher::DqnTeacher(std::size_t state_dim_in, const DqnConfig& config_in)
    : config(config_in),
      state_dim(state_dim_in),
      buffer(config_in.buffer_capacity),
      rng(config_in.seed) {
    config.validate();
    if (state_dim < 1) throw ConfigError("DqnTeacher: state dimension must be >= 1");
    DenseNetSpec spec;
    spec.layer_sizes.push_back(state_dim);
    for (std::size_t i = 0; i < config.hidden_layers; ++i) {
        spec.layer_sizes.push_back(config.hidden_nodes);
    }
    spec.layer_sizes.push_back(config.n_actions);
    spec.output_head = OutputHead::Linear;
    spec.dropout_rate = config.dropout_rate;
    online = DenseNet::init(spec, rng);
    target = online;
    opt = SgdMomentum::create(online, config.teacher_lr, config.momentum);
}

double epsilon_at(std::size_t i, std::size_t horizon, const DqnConfig& config) {
    if (horizon == 0) throw PreconditionError("epsilon_at: horizon must be >= 1");
    if (i > horizon) throw PreconditionError("epsilon_at: i must lie in [0, horizon]");
    if (i == 0) return config.epsilon_start;
    if (i == horizon) return config.epsilon_end;  // endpoints exact
    const double frac = static_cast<double>(i) / static_cast<double>(horizon);
    return config.epsilon_start + (config.epsilon_end - config.epsilon_start) * frac;
}

std::size_t select_batch(const DenseNet& qnet, const std::vector<double>& state, double epsilon,
                         std::size_t n_actions, Rng& rng) {
    if (state.size() != qnet.input_size()) {
        throw DimensionError("select_batch: state length does not match q-net input");
    }
    if (n_actions != qnet.output_size()) {
        throw DimensionError("select_batch: action count does not match q-net output");
    }
    if (rng.bernoulli(epsilon)) {
        return static_cast<std::size_t>(rng.uniform_index(n_actions));
    }
    Matrix input(1, state.size());
    std::copy(state.begin(), state.end(), input.row_ptr(0));
    const Matrix q = predict(qnet, input);
    std::size_t best = 0;
    for (std::size_t a = 1; a < n_actions; ++a) {
        if (q.at(0, a) > q.at(0, best)) best = a;
    }
    return best;
}

Transition make_dqn_transition(std::vector<double> state, std::size_t action_id, double reward,
                               std::vector<double> next_state) {
    Transition t;
    t.state = std::move(state);
    t.action = {static_cast<double>(action_id)};
    t.reward = reward;
    t.next_state = std::move(next_state);
    return t;
}

double dqn_update(DqnTeacher& teacher, const std::vector<Transition>& batch) {
    if (batch.empty()) throw PreconditionError("dqn_update: empty batch");
    const std::size_t n_actions = teacher.config.n_actions;

    Matrix states(batch.size(), teacher.state_dim);
    Matrix next_states(batch.size(), teacher.state_dim);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        if (batch[i].state.size() != teacher.state_dim || batch[i].action.size() != 1) {
            throw DimensionError("dqn_update: transition shape mismatch");
        }
        std::copy(batch[i].state.begin(), batch[i].state.end(), states.row_ptr(i));
        std::copy(batch[i].next_state.begin(), batch[i].next_state.end(),
                  next_states.row_ptr(i));
    }

    // Bootstrap: y = r + gamma * max_a' Q_target(s', a').
    const Matrix q_next = predict(teacher.target, next_states);
    ForwardResult fwd = forward(teacher.online, states, /*train_mode=*/true, teacher.rng);
    Matrix composite = fwd.output();
    double td_sq = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        double best = q_next.at(i, 0);
        for (std::size_t a = 1; a < n_actions; ++a) best = std::max(best, q_next.at(i, a));
        const double y = batch[i].reward + teacher.config.gamma * best;
        const auto taken = static_cast<std::size_t>(batch[i].action[0]);
        if (taken >= n_actions) throw BoundsError("dqn_update: action id out of range");
        const double td = y - composite.at(i, taken);
        td_sq += td * td;
        composite.at(i, taken) = y;
    }
    const double loss = td_sq / static_cast<double>(batch.size());
    if (!std::isfinite(loss)) throw NumericError("dqn_update: non-finite loss");

    Gradients grads = backward(teacher.online, fwd, composite, Loss::Mse);
    sgd_step(teacher.opt, teacher.online, grads);
    return loss;
}

void target_sync(DqnTeacher& teacher) {
    teacher.target = teacher.online;
}

EpisodeResult run_episode_dqn(DqnTeacher& teacher, Student& student, const TaskData& task,
                              const BatchPlan& plan, const DqnEpisodeOptions& options) {
    if (options.iterations < 1) throw PreconditionError("run_episode_dqn: iterations must be >= 1");
    if (plan.size() != task.train.n_rows()) {
        throw PreconditionError("run_episode_dqn: plan does not cover the training set");
    }
    if (plan.n_batches() != teacher.config.n_actions) {
        throw PreconditionError("run_episode_dqn: plan batch count does not match action space");
    }
    const ReferenceVector refs = ReferenceVector::for_student(student);
    const auto sub_idx = accuracy_subsample(task.train.n_rows(), options.accuracy_subsample_cap,
                                            options.subsample_seed);
    const Dataset delta_split = task.train.select_rows(sub_idx);

    EpisodeResult result;
    result.best_test_acc = -1.0;
    result.best_val_acc = -1.0;
    double delta_prev = accuracy(student, delta_split);

    for (std::size_t i = 0; i < options.iterations; ++i) {
        const std::vector<double> state = encode_state(student, refs);
        const double eps =
            options.explore ? epsilon_at(i, options.iterations, teacher.config) : 0.0;
        std::size_t action_id;
        if (i == 0 && options.explore) {
            // First move trains on a random batch.
            action_id = static_cast<std::size_t>(teacher.rng.uniform_index(plan.n_batches()));
        } else {
            action_id = select_batch(teacher.online, state, eps, teacher.config.n_actions,
                                     teacher.rng);
        }

        train_on_indices(student, task.train, plan.batch(action_id));

        const double delta_t = accuracy(student, delta_split);
        const double val_acc = accuracy(student, task.validation);
        double r = reward(delta_t, delta_prev, val_acc);
        if (options.reward_hook) r = options.reward_hook(action_id, r);

        const std::vector<double> next_state = encode_state(student, refs);
        Transition t = make_dqn_transition(state, action_id, r, next_state);

        if (options.update_teacher) {
            dqn_update(teacher, {t});  // newest experience, batch of one
        }
        teacher.buffer.push(std::move(t));
        ++teacher.global_step;

        if (options.update_teacher && (i + 1) % teacher.config.sync_period == 0) {
            if (auto sample = teacher.buffer.try_sample(teacher.config.sync_period, teacher.rng)) {
                dqn_update(teacher, *sample);
            }
            target_sync(teacher);
        }

        const double test_acc = accuracy(student, task.test);
        IterationRecord rec;
        rec.student_id = options.student_id;
        rec.iter = i;
        rec.action_id = static_cast<int>(action_id);
        rec.reward = r;
        rec.train_acc = delta_t;
        rec.val_acc = val_acc;
        rec.test_acc = test_acc;
        rec.epsilon = eps;
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

TeacherSummary train_teacher_dqn(DqnTeacher& teacher, const StudentConfig& student_config,
                                 const TaskData& task, const BatchPlan& plan,
                                 std::size_t n_students, std::size_t iterations,
                                 const DqnEpisodeOptions& base_options) {
    if (n_students < 1 || iterations < 1) {
        throw PreconditionError("train_teacher_dqn: students and iterations must be >= 1");
    }
    TeacherSummary summary;
    for (std::size_t x = 0; x < n_students; ++x) {
        StudentConfig cfg = student_config;
        cfg.seed = student_config.seed + x;
        Student student = init_student(cfg, task.train.n_features(), task.train.n_classes);

        DqnEpisodeOptions options = base_options;
        options.iterations = iterations;
        options.student_id = x;
        EpisodeResult ep = run_episode_dqn(teacher, student, task, plan, options);
        summary.per_student_best.push_back(ep.best_test_acc);
        summary.records.insert(summary.records.end(), ep.records.begin(), ep.records.end());
    }
    return summary;
}

json dqn_to_json(const DqnTeacher& teacher) {
    json j;
    j["format_version"] = kCheckpointFormatVersion;
    j["kind"] = "dqn";
    j["config"] = {{"n_actions", teacher.config.n_actions},
                   {"epsilon_start", teacher.config.epsilon_start},
                   {"epsilon_end", teacher.config.epsilon_end},
                   {"sync_period", teacher.config.sync_period},
                   {"gamma", teacher.config.gamma},
                   {"hidden_layers", teacher.config.hidden_layers},
                   {"hidden_nodes", teacher.config.hidden_nodes},
                   {"dropout_rate", teacher.config.dropout_rate},
                   {"momentum", teacher.config.momentum},
                   {"teacher_lr", teacher.config.teacher_lr},
                   {"buffer_capacity", teacher.config.buffer_capacity},
                   {"seed", teacher.config.seed}};
    j["state_dim"] = teacher.state_dim;
    j["online"] = net_to_json(teacher.online);
    j["target"] = net_to_json(teacher.target);
    j["opt"] = optimizer_to_json(teacher.opt);
    j["global_step"] = teacher.global_step;  // epsilon schedule position
    return j;
}

DqnTeacher dqn_from_json(const json& j) {
    if (j.at("kind").get<std::string>() != "dqn") {
        throw IoError("checkpoint kind is not 'dqn'");
    }
    DqnConfig cfg;
    const json& jc = j.at("config");
    cfg.n_actions = jc.at("n_actions").get<std::size_t>();
    cfg.epsilon_start = jc.at("epsilon_start").get<double>();
    cfg.epsilon_end = jc.at("epsilon_end").get<double>();
    cfg.sync_period = jc.at("sync_period").get<std::size_t>();
    cfg.gamma = jc.at("gamma").get<double>();
    cfg.hidden_layers = jc.at("hidden_layers").get<std::size_t>();
    cfg.hidden_nodes = jc.at("hidden_nodes").get<std::size_t>();
    cfg.dropout_rate = jc.at("dropout_rate").get<double>();
    cfg.momentum = jc.at("momentum").get<double>();
    cfg.teacher_lr = jc.at("teacher_lr").get<double>();
    cfg.buffer_capacity = jc.at("buffer_capacity").get<std::size_t>();
    cfg.seed = jc.at("seed").get<std::uint64_t>();

    DqnTeacher teacher(j.at("state_dim").get<std::size_t>(), cfg);
    teacher.online = net_from_json(j.at("online"));
    teacher.target = net_from_json(j.at("target"));
    teacher.opt = optimizer_from_json(j.at("opt"), teacher.online);
    teacher.global_step = j.at("global_step").get<std::size_t>();
    return teacher;
}

}  // namespace tutor
