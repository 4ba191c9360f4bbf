#include "tutor/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "tutor/checkpoint.hpp"
#include "tutor/error.hpp"
#include "tutor/runlog.hpp"

namespace tutor {

using nlohmann::json;

Dataset synth_blobs(std::size_t n_classes, std::size_t n_per_class, std::size_t dim,
                    double spread, std::uint64_t seed) {
    if (n_classes < 1 || n_per_class < 1 || dim < 1) {
        throw PreconditionError("synth_blobs: counts must be >= 1");
    }
    if (spread < 0.0) throw PreconditionError("synth_blobs: spread must be >= 0");
    Rng rng(seed);
    Dataset ds;
    ds.n_classes = n_classes;
    ds.features = Matrix(n_classes * n_per_class, dim);
    ds.labels.reserve(n_classes * n_per_class);
    // Class k is centred at k * (1,...,1)/sqrt(dim): consecutive means are
    // exactly one unit apart.
    const double step = 1.0 / std::sqrt(static_cast<double>(dim));
    std::size_t row = 0;
    for (std::size_t k = 0; k < n_classes; ++k) {
        const double mean = static_cast<double>(k) * step;
        for (std::size_t i = 0; i < n_per_class; ++i, ++row) {
            double* r = ds.features.row_ptr(row);
            for (std::size_t j = 0; j < dim; ++j) r[j] = mean + spread * rng.normal();
            ds.labels.push_back(static_cast<int>(k));
        }
    }
    ds.validate();
    return ds;
}

TaskData split(const Dataset& dataset, const SplitSpec& spec, std::uint64_t seed) {
    dataset.validate();
    const double total =
        spec.train_fraction + spec.validation_fraction + spec.test_fraction;
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("split: fractions must sum to 1");

    std::vector<std::vector<std::size_t>> by_class(dataset.n_classes);
    for (std::size_t i = 0; i < dataset.n_rows(); ++i) {
        by_class[static_cast<std::size_t>(dataset.labels[i])].push_back(i);
    }
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        if (by_class[c].size() < 5) {
            throw ConfigError("split: class " + std::to_string(c) + " has fewer than 5 rows");
        }
    }

    Rng rng(seed);
    std::vector<std::size_t> train_idx, val_idx, test_idx;
    for (auto& members : by_class) {
        rng.shuffle(members);
        const auto n_c = members.size();
        const auto n_train = static_cast<std::size_t>(
            std::lround(spec.train_fraction * static_cast<double>(n_c)));
        const auto n_val = static_cast<std::size_t>(
            std::lround(spec.validation_fraction * static_cast<double>(n_c)));
        if (n_train + n_val >= n_c) {
            throw ConfigError("split: fractions leave an empty test split for a class");
        }
        train_idx.insert(train_idx.end(), members.begin(), members.begin() + n_train);
        val_idx.insert(val_idx.end(), members.begin() + n_train,
                       members.begin() + n_train + n_val);
        test_idx.insert(test_idx.end(), members.begin() + n_train + n_val, members.end());
    }

    if (spec.balance_train) {
        // Downsample every class in the train split to the smallest count.
        std::vector<std::vector<std::size_t>> train_by_class(dataset.n_classes);
        for (std::size_t i : train_idx) {
            train_by_class[static_cast<std::size_t>(dataset.labels[i])].push_back(i);
        }
        std::size_t smallest = train_idx.size();
        for (const auto& members : train_by_class) smallest = std::min(smallest, members.size());
        train_idx.clear();
        for (const auto& members : train_by_class) {
            train_idx.insert(train_idx.end(), members.begin(), members.begin() + smallest);
        }
    }
    rng.shuffle(train_idx);

    TaskData task;
    task.train = dataset.select_rows(train_idx);
    task.validation = dataset.select_rows(val_idx);
    task.test = dataset.select_rows(test_idx);
    return task;
}

namespace {

Dataset load_dataset(const ExperimentConfig& cfg) {
    if (!cfg.csv_path.empty()) {
        return read_csv_dataset(cfg.csv_path, cfg.label_column);
    }
    return synth_blobs(cfg.synth.n_classes, cfg.synth.n_per_class, cfg.synth.dim,
                       cfg.synth.spread, cfg.seeds.data);
}

}  // namespace

Pipeline build_pipeline(const ExperimentConfig& cfg) {
    const Dataset full = load_dataset(cfg);
    TaskData task = split(full, cfg.split, cfg.seeds.data);
    const Matrix raw_train = task.train.features;

    const Standardizer stz = Standardizer::fit(task.train.features);
    task.train.features = stz.apply(task.train.features);
    task.validation.features = stz.apply(task.validation.features);
    task.test.features = stz.apply(task.test.features);

    json metadata;
    std::vector<double> scores;
    if (cfg.scorer == ScorerKind::Cosine) {
        // Cosine difficulty works on raw features against the mean row; the
        // standardized columns average to zero and give no usable reference.
        std::vector<double> reference = raw_train.column_means();
        if (norm(reference) < 1e-9) {
            reference.assign(raw_train.cols(), 1.0 / std::sqrt(static_cast<double>(raw_train.cols())));
        }
        scores = cosine_scores(raw_train, reference);
        metadata["scorer"] = "cosine";
    } else if (cfg.use_dae) {
        DaeConfig dae_cfg = cfg.dae;
        if (dae_cfg.latent_dim > task.train.n_features()) {
            dae_cfg.latent_dim = task.train.n_features();
        }
        DaeResult dae = train_dae(task.train.features, dae_cfg);
        const Matrix latent = predict(dae.encoder, task.train.features);
        const MomentModel moments = fit_moments(latent, default_ridge(latent));
        scores = mahalanobis_scores(latent, moments);
        metadata["scorer"] = "mahalanobis_dae";
        metadata["dae_initial_mse"] = dae.initial_mse;
        metadata["dae_final_mse"] = dae.final_mse;
    } else {
        const MomentModel moments =
            fit_moments(task.train.features, default_ridge(task.train.features));
        scores = mahalanobis_scores(task.train.features, moments);
        metadata["scorer"] = "mahalanobis_raw";
    }

    BatchPlan plan(scores, cfg.n_batches, cfg.batch_mode);
    return Pipeline{std::move(task), std::move(plan), std::move(scores), std::move(metadata)};
}

namespace {

// Shared per-step bookkeeping for the two baselines.
struct BaselineTracker {
    EpisodeResult result;
    Dataset delta_split;
    double delta_prev = 0.0;

    BaselineTracker(const Student& student, const TaskData& task, std::size_t subsample_cap,
                    std::uint64_t subsample_seed) {
        const auto sub =
            accuracy_subsample(task.train.n_rows(), subsample_cap, subsample_seed);
        delta_split = task.train.select_rows(sub);
        delta_prev = accuracy(student, delta_split);
        result.best_test_acc = -1.0;
        result.best_val_acc = -1.0;
    }

    void record_step(const Student& student, const TaskData& task, std::size_t step,
                     const std::string& mode) {
        const double delta_t = accuracy(student, delta_split);
        const double val_acc = accuracy(student, task.validation);
        const double test_acc = accuracy(student, task.test);
        IterationRecord rec;
        rec.iter = step;
        rec.reward = reward(delta_t, delta_prev, val_acc);
        rec.train_acc = delta_t;
        rec.val_acc = val_acc;
        rec.test_acc = test_acc;
        rec.mode = mode;
        result.records.push_back(std::move(rec));
        if (test_acc > result.best_test_acc) {
            result.best_test_acc = test_acc;
            result.best_iter = step;
            result.best_net = student.net;
        }
        if (val_acc > result.best_val_acc) {
            result.best_val_acc = val_acc;
            result.best_val_iter = step;
            result.best_val_net = student.net;
        }
        delta_prev = delta_t;
    }
};

}  // namespace

EpisodeResult baseline_batchwise(const StudentConfig& student_config, const TaskData& task,
                                 std::size_t batch_size, std::size_t steps, std::uint64_t seed,
                                 std::size_t subsample_cap, std::uint64_t subsample_seed) {
    if (batch_size < 1 || batch_size > task.train.n_rows()) {
        throw PreconditionError("baseline_batchwise: batch size must lie in [1, n_train]");
    }
    Student student = init_student(student_config, task.train.n_features(), task.train.n_classes);
    BaselineTracker tracker(student, task, subsample_cap, subsample_seed);
    Rng rng(seed);
    for (std::size_t step = 0; step < steps; ++step) {
        const auto batch = rng.sample_without_replacement(task.train.n_rows(), batch_size);
        train_on_indices(student, task.train, batch);
        tracker.record_step(student, task, step, "baseline_batchwise");
    }
    return std::move(tracker.result);
}

EpisodeResult baseline_curriculum(const StudentConfig& student_config, const TaskData& task,
                                  const BatchPlan& plan, std::size_t steps,
                                  std::size_t subsample_cap, std::uint64_t subsample_seed) {
    if (plan.size() != task.train.n_rows()) {
        throw PreconditionError("baseline_curriculum: plan does not cover the training set");
    }
    Student student = init_student(student_config, task.train.n_features(), task.train.n_classes);
    BaselineTracker tracker(student, task, subsample_cap, subsample_seed);
    const std::size_t n_batches = plan.n_batches();
    for (std::size_t step = 0; step < steps; ++step) {
        // Equal share of the budget per batch, presented easiest-first.
        const std::size_t batch_id = std::min(n_batches - 1, step * n_batches / steps);
        train_on_indices(student, task.train, plan.batch(batch_id));
        tracker.record_step(student, task, step, "baseline_curriculum");
    }
    return std::move(tracker.result);
}

namespace {

namespace fs = std::filesystem;

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

void save_student_best(const ExperimentConfig& cfg, const EpisodeResult& ep,
                       const std::string& path) {
    const bool on_val = cfg.select_on_validation;
    const DenseNet& net = on_val ? ep.best_val_net : ep.best_net;
    if (net.weights.empty()) return;  // zero-step run, nothing to save
    Student holder;
    holder.config = cfg.student;
    holder.net = net;
    holder.optimizer = SgdMomentum::create(holder.net, cfg.student.learning_rate, 0.0);
    holder.step_counter = (on_val ? ep.best_val_iter : ep.best_iter) + 1;
    write_json_file(path, student_to_json(holder, on_val ? ep.best_val_acc : ep.best_test_acc));
}

// Thinning keeps every k-th record plus the last one of each student.
void log_records(RunLog& log, const std::vector<IterationRecord>& records,
                 std::size_t thin = 1) {
    for (std::size_t i = 0; i < records.size(); ++i) {
        const bool last_of_student = i + 1 == records.size() ||
                                     records[i + 1].student_id != records[i].student_id;
        if (records[i].iter % thin == 0 || last_of_student) {
            log.append_iteration(records[i]);
        }
    }
}

double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

std::size_t resolved_state_dim(const ExperimentConfig& cfg, const TaskData& task) {
    Student probe = init_student(cfg.student, task.train.n_features(), task.train.n_classes);
    return state_length(probe);
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) return 0.0;
    const double ma = mean_of(a), mb = mean_of(b);
    double num = 0.0, da = 0.0, db = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - ma) * (b[i] - mb);
        da += (a[i] - ma) * (a[i] - ma);
        db += (b[i] - mb) * (b[i] - mb);
    }
    if (da <= 0.0 || db <= 0.0) return da == db ? 1.0 : 0.0;
    return num / std::sqrt(da * db);
}

RunOutcome run_train_like(const ExperimentConfig& cfg, const Pipeline& pipe, RunLog& log,
                          bool constrained, double lr_slowdown) {
    if (cfg.teacher_kind == TeacherKind::None) {
        throw ConfigError("experiment needs teacher.kind = ddpg or dqn");
    }
    StudentConfig student_cfg = cfg.student;
    if (lr_slowdown > 0.0) student_cfg.learning_rate = cfg.student.learning_rate / lr_slowdown;

    const std::string teacher_log_path =
        (fs::path(cfg.out_dir) / "teacher_train.jsonl").string();
    RunLog teacher_log(teacher_log_path, cfg.hash);

    RunOutcome outcome;
    outcome.out_dir = cfg.out_dir;
    outcome.runlog_path = log.path();

    if (cfg.teacher_kind == TeacherKind::Ddpg) {
        DdpgTeacher teacher(resolved_state_dim(cfg, pipe.task), cfg.ddpg);
        EpisodeOptions train_opts;
        train_opts.constrained = constrained;
        train_opts.constrain_prob = cfg.constrain_prob;
        train_opts.mode_label = constrained ? "constrain" : "train";
        train_opts.accuracy_subsample_cap = cfg.subsample_cap;
        train_opts.subsample_seed = cfg.seeds.data;
        TeacherSummary summary = train_teacher(teacher, student_cfg, pipe.task, pipe.plan,
                                               cfg.teacher_students, cfg.iterations, train_opts);
        log_records(teacher_log, summary.records, cfg.log_thin);
        teacher_log.finish_summary(
            *std::max_element(summary.per_student_best.begin(), summary.per_student_best.end()),
            0, json{{"per_student_best", summary.per_student_best}});
        write_json_file((fs::path(cfg.out_dir) / "teacher.json").string(), ddpg_to_json(teacher));

        // A fresh student trained by the frozen greedy policy.
        StudentConfig greedy_cfg = student_cfg;
        greedy_cfg.seed = student_cfg.seed + cfg.teacher_students;
        Student student =
            init_student(greedy_cfg, pipe.task.train.n_features(), pipe.task.train.n_classes);
        EpisodeOptions greedy_opts;
        greedy_opts.iterations = cfg.iterations;
        greedy_opts.explore = false;
        greedy_opts.update_teacher = false;
        greedy_opts.constrained = constrained;
        greedy_opts.constrain_prob = cfg.constrain_prob;
        greedy_opts.mode_label = "greedy";
        greedy_opts.student_id = cfg.teacher_students;
        greedy_opts.accuracy_subsample_cap = cfg.subsample_cap;
        greedy_opts.subsample_seed = cfg.seeds.data;
        EpisodeResult ep = run_episode(teacher, student, pipe.task, pipe.plan, greedy_opts);

        log_records(log, ep.records, cfg.log_thin);
        save_student_best(cfg, ep, (fs::path(cfg.out_dir) / "student_best.json").string());
        outcome.best_test_acc = ep.best_test_acc;
        outcome.best_iter = ep.best_iter;
        json extra = pipe.metadata;
        extra["teacher_kind"] = "ddpg";
        // The replay reading in use, so runs stay auditable.
        extra["replay_schedule"] =
            "every " + std::to_string(cfg.ddpg.replay_every) +
            " steps: one update on the " + std::to_string(cfg.ddpg.replay_batch) +
            " newest transitions, then one on a uniform sample of " +
            std::to_string(cfg.ddpg.replay_batch);
        extra["mean_student_best"] = mean_of(summary.per_student_best);
        extra["best_val_acc"] = ep.best_val_acc;
        if (lr_slowdown > 0.0) {
            extra["lr_ratio"] = lr_slowdown;
            extra["student_lr_base"] = cfg.student.learning_rate;
            extra["student_lr_used"] = student_cfg.learning_rate;
        }
        log.finish_summary(ep.best_test_acc, ep.best_iter, extra);
        outcome.summary = std::move(extra);
        outcome.summary["best_test_acc"] = ep.best_test_acc;
        outcome.summary["best_iter"] = ep.best_iter;
    } else {
        if (constrained) {
            throw ConfigError("constrained width applies to the ddpg teacher only");
        }
        DqnConfig dqn_cfg = cfg.dqn;
        dqn_cfg.n_actions = pipe.plan.n_batches();
        DqnTeacher teacher(resolved_state_dim(cfg, pipe.task), dqn_cfg);
        DqnEpisodeOptions train_opts;
        train_opts.mode_label = "train";
        train_opts.accuracy_subsample_cap = cfg.subsample_cap;
        train_opts.subsample_seed = cfg.seeds.data;
        TeacherSummary summary = train_teacher_dqn(teacher, student_cfg, pipe.task, pipe.plan,
                                                   cfg.teacher_students, cfg.iterations,
                                                   train_opts);
        log_records(teacher_log, summary.records, cfg.log_thin);
        teacher_log.finish_summary(
            *std::max_element(summary.per_student_best.begin(), summary.per_student_best.end()),
            0, json{{"per_student_best", summary.per_student_best}});
        write_json_file((fs::path(cfg.out_dir) / "teacher.json").string(), dqn_to_json(teacher));

        StudentConfig greedy_cfg = student_cfg;
        greedy_cfg.seed = student_cfg.seed + cfg.teacher_students;
        Student student =
            init_student(greedy_cfg, pipe.task.train.n_features(), pipe.task.train.n_classes);
        DqnEpisodeOptions greedy_opts;
        greedy_opts.iterations = cfg.iterations;
        greedy_opts.explore = false;
        greedy_opts.update_teacher = false;
        greedy_opts.mode_label = "greedy";
        greedy_opts.student_id = cfg.teacher_students;
        greedy_opts.accuracy_subsample_cap = cfg.subsample_cap;
        greedy_opts.subsample_seed = cfg.seeds.data;
        EpisodeResult ep = run_episode_dqn(teacher, student, pipe.task, pipe.plan, greedy_opts);

        log_records(log, ep.records, cfg.log_thin);
        save_student_best(cfg, ep, (fs::path(cfg.out_dir) / "student_best.json").string());
        outcome.best_test_acc = ep.best_test_acc;
        outcome.best_iter = ep.best_iter;
        json extra = pipe.metadata;
        extra["teacher_kind"] = "dqn";
        extra["update_schedule"] =
            "batch-1 TD update per step, plus a replay batch of " +
            std::to_string(cfg.dqn.sync_period) + " and a target sync every " +
            std::to_string(cfg.dqn.sync_period) + " steps";
        extra["mean_student_best"] = mean_of(summary.per_student_best);
        extra["best_val_acc"] = ep.best_val_acc;
        if (lr_slowdown > 0.0) {
            extra["lr_ratio"] = lr_slowdown;
            extra["student_lr_base"] = cfg.student.learning_rate;
            extra["student_lr_used"] = student_cfg.learning_rate;
        }
        log.finish_summary(ep.best_test_acc, ep.best_iter, extra);
        outcome.summary = std::move(extra);
        outcome.summary["best_test_acc"] = ep.best_test_acc;
        outcome.summary["best_iter"] = ep.best_iter;
    }
    return outcome;
}

RunOutcome run_baseline(const ExperimentConfig& cfg, const Pipeline& pipe, RunLog& log) {
    EpisodeResult ep;
    if (cfg.kind == ExperimentKind::BaselineBatchwise) {
        ep = baseline_batchwise(cfg.student, pipe.task, cfg.baseline_batch_size, cfg.iterations,
                                cfg.seeds.data ^ 0x5DEECE66DULL, cfg.subsample_cap,
                                cfg.seeds.data);
    } else {
        BatchPlan plan = pipe.plan;
        if (plan.mode() != BatchMode::Cumulative) {
            // Direct curriculum training defaults to cumulative batches.
            plan = BatchPlan(pipe.scores, cfg.n_batches, BatchMode::Cumulative);
        }
        ep = baseline_curriculum(cfg.student, pipe.task, plan, cfg.iterations, cfg.subsample_cap,
                                 cfg.seeds.data);
    }
    log_records(log, ep.records, cfg.log_thin);
    save_student_best(cfg, ep, (fs::path(cfg.out_dir) / "student_best.json").string());
    json extra = pipe.metadata;
    extra["baseline"] = to_string(cfg.kind);
    const double best = ep.records.empty() ? 0.0 : ep.best_test_acc;
    log.finish_summary(best, ep.best_iter, std::move(extra));

    RunOutcome outcome;
    outcome.out_dir = cfg.out_dir;
    outcome.runlog_path = log.path();
    outcome.best_test_acc = best;
    outcome.best_iter = ep.best_iter;
    outcome.summary = json{{"best_test_acc", best}};
    return outcome;
}

DdpgTeacher load_or_train_ddpg(const ExperimentConfig& cfg, const Pipeline& pipe) {
    if (!cfg.teacher_checkpoint.empty()) {
        return ddpg_from_json(read_json_file(cfg.teacher_checkpoint));
    }
    DdpgTeacher teacher(resolved_state_dim(cfg, pipe.task), cfg.ddpg);
    EpisodeOptions opts;
    opts.accuracy_subsample_cap = cfg.subsample_cap;
    opts.subsample_seed = cfg.seeds.data;
    train_teacher(teacher, cfg.student, pipe.task, pipe.plan, cfg.teacher_students,
                  cfg.iterations, opts);
    return teacher;
}

RunOutcome run_perturb(const ExperimentConfig& cfg, const Pipeline& pipe, RunLog& log) {
    DdpgTeacher teacher = load_or_train_ddpg(cfg, pipe);
    if (teacher.state_dim != resolved_state_dim(cfg, pipe.task)) {
        throw TransferError("teacher expects state length " + std::to_string(teacher.state_dim) +
                            " but this task produces " +
                            std::to_string(resolved_state_dim(cfg, pipe.task)));
    }

    // Greedy trajectory driven by clean states; at every step the perturbed
    // state is scored by the same frozen policy and both actions are logged.
    StudentConfig greedy_cfg = cfg.student;
    greedy_cfg.seed = cfg.student.seed + cfg.teacher_students;
    Student student =
        init_student(greedy_cfg, pipe.task.train.n_features(), pipe.task.train.n_classes);
    const ReferenceVector refs = ReferenceVector::for_student(student);
    Rng noise_rng(cfg.seeds.teacher ^ 0xA5A5A5A5ULL);

    const std::size_t n_train = pipe.task.train.n_rows();
    std::vector<double> centers, centers_pert, widths, widths_pert;
    std::ofstream pairs((fs::path(cfg.out_dir) / "pairs.csv").string());
    if (!pairs) throw IoError("cannot open pairs.csv for writing");
    pairs << "iter,center,width,center_perturbed,width_perturbed\n";

    for (std::size_t i = 0; i < cfg.iterations; ++i) {
        const std::vector<double> state = encode_state(student, refs);
        const Action clean = act(teacher, state, /*explore=*/false, n_train);
        const std::vector<double> noised = perturb_state(state, cfg.perturb_sigma, noise_rng);
        const Action pert = act(teacher, noised, /*explore=*/false, n_train);

        const auto window = slice_window(pipe.plan, clean.center_index, clean.width);
        train_on_indices(student, pipe.task.train, window);

        pairs << i << "," << clean.center_index << "," << clean.width << ","
              << pert.center_index << "," << pert.width << "\n";
        centers.push_back(static_cast<double>(clean.center_index));
        centers_pert.push_back(static_cast<double>(pert.center_index));
        widths.push_back(static_cast<double>(clean.width));
        widths_pert.push_back(static_cast<double>(pert.width));

        json rec;
        rec["record"] = "pair";
        rec["iter"] = i;
        rec["center"] = clean.center_index;
        rec["width"] = clean.width;
        rec["center_perturbed"] = pert.center_index;
        rec["width_perturbed"] = pert.width;
        log.append_record(std::move(rec));
    }
    if (!pairs) throw IoError("write failed: pairs.csv");

    json extra = pipe.metadata;
    extra["sigma"] = cfg.perturb_sigma;
    extra["center_correlation"] = pearson(centers, centers_pert);
    extra["width_correlation"] = pearson(widths, widths_pert);
    // Mean absolute centre shift as a fraction of the curriculum length;
    // robust when one side of a pair is constant.
    double shift = 0.0;
    for (std::size_t i = 0; i < centers.size(); ++i) {
        shift += std::abs(centers[i] - centers_pert[i]);
    }
    extra["mean_center_shift_frac"] =
        centers.empty() ? 0.0 : shift / (static_cast<double>(centers.size()) * n_train);
    log.finish_summary(0.0, 0, extra);

    RunOutcome outcome;
    outcome.out_dir = cfg.out_dir;
    outcome.runlog_path = log.path();
    outcome.summary = std::move(extra);
    return outcome;
}

RunOutcome run_transfer(const ExperimentConfig& cfg, const Pipeline& pipe, RunLog& log) {
    if (cfg.teacher_checkpoint.empty()) {
        throw ConfigError("transfer requires teacher.checkpoint");
    }
    const json ckpt = read_json_file(cfg.teacher_checkpoint);
    const std::string kind = ckpt.value("kind", "");
    const std::size_t task_state_dim = resolved_state_dim(cfg, pipe.task);

    EpisodeResult ep;
    if (kind == "ddpg") {
        DdpgTeacher teacher = ddpg_from_json(ckpt);
        if (teacher.state_dim != task_state_dim) {
            throw TransferError("teacher expects state length " +
                                std::to_string(teacher.state_dim) + " but this task produces " +
                                std::to_string(task_state_dim));
        }
        Student student =
            init_student(cfg.student, pipe.task.train.n_features(), pipe.task.train.n_classes);
        EpisodeOptions opts;
        opts.iterations = cfg.iterations;
        opts.explore = false;
        opts.update_teacher = false;
        opts.mode_label = "transfer";
        opts.accuracy_subsample_cap = cfg.subsample_cap;
        opts.subsample_seed = cfg.seeds.data;
        ep = run_episode(teacher, student, pipe.task, pipe.plan, opts);
    } else if (kind == "dqn") {
        DqnTeacher teacher = dqn_from_json(ckpt);
        if (teacher.state_dim != task_state_dim) {
            throw TransferError("teacher expects state length " +
                                std::to_string(teacher.state_dim) + " but this task produces " +
                                std::to_string(task_state_dim));
        }
        if (teacher.config.n_actions != pipe.plan.n_batches()) {
            throw TransferError("teacher has " + std::to_string(teacher.config.n_actions) +
                                " actions but the plan has " +
                                std::to_string(pipe.plan.n_batches()) + " batches");
        }
        Student student =
            init_student(cfg.student, pipe.task.train.n_features(), pipe.task.train.n_classes);
        DqnEpisodeOptions opts;
        opts.iterations = cfg.iterations;
        opts.explore = false;
        opts.update_teacher = false;
        opts.mode_label = "transfer";
        opts.accuracy_subsample_cap = cfg.subsample_cap;
        opts.subsample_seed = cfg.seeds.data;
        ep = run_episode_dqn(teacher, student, pipe.task, pipe.plan, opts);
    } else {
        throw IoError("teacher checkpoint has unknown kind '" + kind + "'");
    }

    log_records(log, ep.records, cfg.log_thin);
    save_student_best(cfg, ep, (fs::path(cfg.out_dir) / "student_best.json").string());
    json extra = pipe.metadata;
    extra["transfer_from"] = cfg.teacher_checkpoint;
    extra["teacher_kind"] = kind;
    log.finish_summary(ep.best_test_acc, ep.best_iter, std::move(extra));

    RunOutcome outcome;
    outcome.out_dir = cfg.out_dir;
    outcome.runlog_path = log.path();
    outcome.best_test_acc = ep.best_test_acc;
    outcome.best_iter = ep.best_iter;
    outcome.summary = json{{"best_test_acc", ep.best_test_acc}};
    return outcome;
}

}  // namespace

RunOutcome run(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    write_text_file((fs::path(cfg.out_dir) / "config_resolved.cfg").string(),
                    cfg.source.canonical());

    Pipeline pipe = build_pipeline(cfg);
    write_json_file((fs::path(cfg.out_dir) / "plan.json").string(), pipe.plan.to_json());

    RunLog log((fs::path(cfg.out_dir) / "run.jsonl").string(), cfg.hash);

    switch (cfg.kind) {
        case ExperimentKind::Train:
            return run_train_like(cfg, pipe, log, /*constrained=*/false, 0.0);
        case ExperimentKind::Constrain:
            return run_train_like(cfg, pipe, log, /*constrained=*/true, 0.0);
        case ExperimentKind::SlowLr: {
            if (cfg.slow_lr_ratio <= 0.0) throw ConfigError("slow_lr.ratio must be > 0");
            RunOutcome outcome =
                run_train_like(cfg, pipe, log, /*constrained=*/true, cfg.slow_lr_ratio);
            write_json_file((fs::path(cfg.out_dir) / "slow_lr_metadata.json").string(),
                            outcome.summary);
            return outcome;
        }
        case ExperimentKind::BaselineBatchwise:
        case ExperimentKind::BaselineCurriculum:
            return run_baseline(cfg, pipe, log);
        case ExperimentKind::Perturb:
            return run_perturb(cfg, pipe, log);
        case ExperimentKind::Transfer:
            return run_transfer(cfg, pipe, log);
        case ExperimentKind::Curriculum: {
            json extra = pipe.metadata;
            extra["n_batches"] = pipe.plan.n_batches();
            extra["mode"] = to_string(pipe.plan.mode());
            log.finish_summary(0.0, 0, std::move(extra));
            RunOutcome outcome;
            outcome.out_dir = cfg.out_dir;
            outcome.runlog_path = log.path();
            outcome.summary = json{{"plan", (fs::path(cfg.out_dir) / "plan.json").string()}};
            return outcome;
        }
    }
    throw ConfigError("unhandled experiment kind");
}

}  // namespace tutor
