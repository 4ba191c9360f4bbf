// Acceptance suite: every criterion prints one PASS/FAIL line. Run with a
// criterion number (1..12) to execute a single check, or with no arguments
// to execute all of them.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tutor/config.hpp"
#include "tutor/curriculum.hpp"
#include "tutor/ddpg.hpp"
#include "tutor/dqn.hpp"
#include "tutor/experiments.hpp"
#include "tutor/net.hpp"
#include "tutor/replay.hpp"
#include "tutor/runlog.hpp"
#include "tutor/student.hpp"

using namespace tutor;
namespace fs = std::filesystem;

namespace {

std::string work_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "tutor_acceptance" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

std::uint64_t file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return 0;
    std::uint64_t h = 1469598103934665603ULL;
    char c;
    while (in.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

std::string file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// 1. Gradient oracle
// ---------------------------------------------------------------------------

bool criterion_gradient_oracle(std::string& detail) {
    Rng rng(101);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n_hidden = 1 + rng.uniform_index(3);
        std::vector<std::size_t> sizes;
        sizes.push_back(1 + rng.uniform_index(8));
        for (std::size_t h = 0; h < n_hidden; ++h) sizes.push_back(1 + rng.uniform_index(8));
        const std::size_t n_out = 2 + rng.uniform_index(7);
        sizes.push_back(n_out);

        const int head_pick = trial % 3;
        DenseNetSpec spec{sizes,
                          head_pick == 0 ? OutputHead::Softmax
                                         : (head_pick == 1 ? OutputHead::Linear : OutputHead::Tanh),
                          0.0};
        const Loss loss = head_pick == 0 ? Loss::CrossEntropy : Loss::Mse;
        Rng init_rng(200 + static_cast<std::uint64_t>(trial));
        DenseNet net = DenseNet::init(spec, init_rng);
        for (auto& w : net.weights) {
            for (double& v : w.data()) v = rng.uniform(-1.0, 1.0);
        }
        for (auto& b : net.biases) {
            for (double& v : b) v = rng.uniform(-1.0, 1.0);
        }

        const std::size_t batch = 1 + rng.uniform_index(5);
        Matrix x(batch, sizes.front());
        for (double& v : x.data()) v = rng.uniform(-1.0, 1.0);
        Matrix targets(batch, n_out);
        if (loss == Loss::CrossEntropy) {
            for (std::size_t i = 0; i < batch; ++i) {
                targets.at(i, rng.uniform_index(n_out)) = 1.0;
            }
        } else {
            for (double& v : targets.data()) v = rng.uniform(-1.0, 1.0);
        }

        Rng fwd_rng(0);
        ForwardResult fwd = forward(net, x, false, fwd_rng);
        Gradients analytic = backward(net, fwd, targets, loss);
        Gradients numeric = finite_diff_grad(net, x, targets, loss, 1e-5);
        for (std::size_t k = 0; k < analytic.weights.size(); ++k) {
            for (std::size_t i = 0; i < analytic.weights[k].size(); ++i) {
                const double a = analytic.weights[k].data()[i];
                const double b = numeric.weights[k].data()[i];
                worst = std::max(worst, std::abs(a - b) / std::max(1e-6, std::abs(b)));
            }
            for (std::size_t j = 0; j < analytic.biases[k].size(); ++j) {
                const double a = analytic.biases[k][j];
                const double b = numeric.biases[k][j];
                worst = std::max(worst, std::abs(a - b) / std::max(1e-6, std::abs(b)));
            }
        }
    }
    detail = "max relative error " + std::to_string(worst) + " over 100 nets";
    return worst < 1e-4;
}

// ---------------------------------------------------------------------------
// 2. Mahalanobis equivalence (factored solve vs explicit dense inverse)
// ---------------------------------------------------------------------------

Matrix gauss_jordan_inverse(Matrix a) {
    const std::size_t n = a.rows();
    Matrix inv(n, n);
    for (std::size_t i = 0; i < n; ++i) inv.at(i, i) = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a.at(r, col)) > std::abs(a.at(pivot, col))) pivot = r;
        }
        for (std::size_t j = 0; j < n; ++j) {
            std::swap(a.at(col, j), a.at(pivot, j));
            std::swap(inv.at(col, j), inv.at(pivot, j));
        }
        const double p = a.at(col, col);
        for (std::size_t j = 0; j < n; ++j) {
            a.at(col, j) /= p;
            inv.at(col, j) /= p;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a.at(r, col);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) {
                a.at(r, j) -= f * a.at(col, j);
                inv.at(r, j) -= f * inv.at(col, j);
            }
        }
    }
    return inv;
}

bool criterion_mahalanobis(std::string& detail) {
    Rng rng(202);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t d = 2 + rng.uniform_index(7);  // up to 8 dims
        Matrix a(d, d);
        for (double& v : a.data()) v = rng.uniform(-1.0, 1.0);
        Matrix s = a.transposed_matmul(a);  // A^T A, positive semidefinite
        for (std::size_t i = 0; i < d; ++i) s.at(i, i) += 0.5;

        std::vector<double> mu(d), x(d);
        for (double& v : mu) v = rng.uniform(-2.0, 2.0);
        for (double& v : x) v = rng.uniform(-2.0, 2.0);

        MomentModel model(mu, s, 0.0);
        const double factored = model.mahalanobis(x);

        const Matrix inv = gauss_jordan_inverse(s);
        std::vector<double> diff(d);
        for (std::size_t i = 0; i < d; ++i) diff[i] = x[i] - mu[i];
        double quad = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) quad += diff[i] * inv.at(i, j) * diff[j];
        }
        const double dense = std::sqrt(quad);
        worst = std::max(worst, std::abs(factored - dense));
    }
    detail = "max |factored - dense| = " + std::to_string(worst) + " over 50 triples";
    return worst < 1e-8;
}

// ---------------------------------------------------------------------------
// 3. Batch-plan algebra
// ---------------------------------------------------------------------------

bool criterion_batch_plans(std::string& detail) {
    Rng rng(303);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.uniform_index(200);
        const std::size_t n_batches = 1 + rng.uniform_index(n);
        std::vector<double> scores(n);
        for (double& s : scores) s = rng.uniform(0.0, 100.0);
        const bool disjoint = trial % 2 == 0;
        BatchPlan plan(scores, n_batches, disjoint ? BatchMode::Disjoint : BatchMode::Cumulative);

        if (disjoint) {
            std::set<std::size_t> seen;
            for (std::size_t b = 0; b < n_batches; ++b) {
                const auto batch = plan.batch(b);
                if (batch.empty()) {
                    detail = "empty disjoint batch";
                    return false;
                }
                for (std::size_t idx : batch) {
                    if (!seen.insert(idx).second) {
                        detail = "index appears in two disjoint batches";
                        return false;
                    }
                }
                if (b + 1 < n_batches) {
                    double hi = -1e300, lo = 1e300;
                    for (std::size_t idx : batch) hi = std::max(hi, scores[idx]);
                    for (std::size_t idx : plan.batch(b + 1)) lo = std::min(lo, scores[idx]);
                    if (hi > lo) {
                        detail = "score ordering broken across a batch boundary";
                        return false;
                    }
                }
            }
            if (seen.size() != n) {
                detail = "disjoint batches do not partition the index set";
                return false;
            }
        } else {
            std::vector<std::size_t> prev;
            for (std::size_t b = 0; b < n_batches; ++b) {
                const auto batch = plan.batch(b);
                if (b > 0) {
                    if (batch.size() <= prev.size()) {
                        detail = "cumulative batch did not grow strictly";
                        return false;
                    }
                    const std::set<std::size_t> cur(batch.begin(), batch.end());
                    for (std::size_t idx : prev) {
                        if (cur.count(idx) == 0) {
                            detail = "cumulative subset chain broken";
                            return false;
                        }
                    }
                }
                prev = batch;
            }
            if (prev.size() != n) {
                detail = "last cumulative batch is not the full set";
                return false;
            }
        }
    }
    detail = "200 random plans satisfied partition/order/subset algebra";
    return true;
}

// ---------------------------------------------------------------------------
// 4. DAE training improvement
// ---------------------------------------------------------------------------

bool criterion_dae(std::string& detail) {
    Dataset ds = synth_blobs(4, 500, 8, 0.8, 0);
    const Standardizer stz = Standardizer::fit(ds.features);
    const Matrix features = stz.apply(ds.features);
    DaeConfig cfg;
    cfg.latent_dim = 8;
    cfg.noise = 0.2;
    cfg.epochs = 30;
    cfg.learning_rate = 0.01;
    cfg.seed = 0;
    DaeResult result = train_dae(features, cfg);
    detail = "initial mse " + std::to_string(result.initial_mse) + ", final mse " +
             std::to_string(result.final_mse);
    return result.final_mse < 0.5 * result.initial_mse;
}

// ---------------------------------------------------------------------------
// 5. Reward / soft-update / epsilon exactness
// ---------------------------------------------------------------------------

bool criterion_exactness(std::string& detail) {
    Rng rng(505);
    for (int i = 0; i < 1000; ++i) {
        const double d = rng.uniform();
        const double v = rng.uniform();
        if (reward(d, d, v) != 0.0) {
            detail = "reward(d, d, v) was not exactly zero";
            return false;
        }
    }

    DdpgConfig cfg;
    cfg.hidden_layers = 2;
    cfg.hidden_nodes = 6;
    cfg.dropout_rate = 0.0;
    cfg.seed = 11;
    DdpgTeacher teacher(5, cfg);
    DenseNet online = teacher.actor;
    for (auto& w : online.weights) {
        for (double& x : w.data()) x = rng.uniform(-1.0, 1.0);
    }
    for (const double tau : {0.0, 0.5, 1.0}) {
        DenseNet target = teacher.actor_target;
        DenseNet expected = target;
        soft_update(target, online, tau);
        for (std::size_t k = 0; k < target.weights.size(); ++k) {
            for (std::size_t i = 0; i < target.weights[k].size(); ++i) {
                const double want = tau * online.weights[k].data()[i] +
                                    (1.0 - tau) * expected.weights[k].data()[i];
                if (std::abs(target.weights[k].data()[i] - want) > 1e-12) {
                    detail = "soft_update deviates from the convex blend at tau=" +
                             std::to_string(tau);
                    return false;
                }
            }
        }
    }

    DqnConfig dqn_cfg;
    for (const auto& [start, end] : std::vector<std::pair<double, double>>{
             {1.0, 0.05}, {0.7, 0.1}, {0.3, 0.3}}) {
        dqn_cfg.epsilon_start = start;
        dqn_cfg.epsilon_end = end;
        for (const std::size_t horizon : {1ul, 7ul, 10000ul}) {
            if (epsilon_at(0, horizon, dqn_cfg) != start ||
                epsilon_at(horizon, horizon, dqn_cfg) != end) {
                detail = "epsilon endpoints are not exact";
                return false;
            }
        }
    }
    detail = "1000 reward draws, 3 tau blends and 9 epsilon endpoint pairs exact";
    return true;
}

// ---------------------------------------------------------------------------
// 6. Replay statistics
// ---------------------------------------------------------------------------

bool criterion_replay(std::string& detail) {
    ReplayBuffer fifo(3);
    for (int i = 0; i < 5; ++i) {
        Transition t;
        t.reward = i;
        fifo.push(t);
    }
    if (fifo.size() != 3 || fifo.from_oldest(0).reward != 2.0 ||
        fifo.from_oldest(2).reward != 4.0) {
        detail = "FIFO eviction failed";
        return false;
    }

    ReplayBuffer buf(10);
    for (int i = 0; i < 10; ++i) {
        Transition t;
        t.reward = i;
        buf.push(t);
    }
    Rng rng(606);
    std::vector<double> counts(10, 0.0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        const auto sample = buf.try_sample(1, rng);
        counts[static_cast<std::size_t>((*sample)[0].reward)] += 1.0;
    }
    const double expected = draws / 10.0;
    double stat = 0.0;
    for (double c : counts) stat += (c - expected) * (c - expected) / expected;
    // Chi-square with 9 dof: p > 0.001 iff stat < 27.877164875.
    detail = "chi-square statistic " + std::to_string(stat) + " (crit 27.877 at p=0.001)";
    return stat < 27.877164875;
}

// ---------------------------------------------------------------------------
// 7. Teacher convergence on planted environments
// ---------------------------------------------------------------------------

struct PlantedSetup {
    TaskData task;
    std::vector<double> scores;
};

PlantedSetup planted_setup() {
    Dataset ds = synth_blobs(2, 100, 4, 0.5, 7);
    SplitSpec spec;
    PlantedSetup setup;
    setup.task = split(ds, spec, 7);
    const Standardizer stz = Standardizer::fit(setup.task.train.features);
    setup.task.train.features = stz.apply(setup.task.train.features);
    setup.task.validation.features = stz.apply(setup.task.validation.features);
    setup.task.test.features = stz.apply(setup.task.test.features);
    setup.scores.resize(setup.task.train.n_rows());
    for (std::size_t i = 0; i < setup.scores.size(); ++i) {
        setup.scores[i] = setup.task.train.features.at(i, 0);
    }
    return setup;
}

bool criterion_planted_ddpg(std::string& detail) {
    PlantedSetup setup = planted_setup();
    const std::size_t n_train = setup.task.train.n_rows();
    const std::size_t threshold = n_train - n_train / 10;  // top decile of positions
    BatchPlan plan(setup.scores, 20, BatchMode::Disjoint);

    StudentConfig scfg;
    scfg.hidden_layers = 2;
    scfg.hidden_nodes = 4;
    scfg.learning_rate = 0.01;
    scfg.seed = 3;

    DdpgConfig cfg;
    cfg.gamma = 0.9;
    cfg.tau = 0.05;
    cfg.update_frequency = 20;
    cfg.replay_batch = 10;
    cfg.replay_every = 10;
    cfg.buffer_capacity = 100000;
    cfg.hidden_layers = 2;
    cfg.hidden_nodes = 24;
    cfg.dropout_rate = 0.0;
    cfg.momentum = 0.9;
    cfg.teacher_lr = 0.02;
    cfg.ou_sigma = 0.4;
    cfg.ou_sigma_end = 0.05;
    cfg.width_max = 12;
    cfg.seed = 1;

    Student probe = init_student(scfg, setup.task.train.n_features(), setup.task.train.n_classes);
    DdpgTeacher teacher(state_length(probe), cfg);

    EpisodeOptions opts;
    opts.reward_hook = [&](const Action& a, double) {
        return a.center_index >= threshold ? 1.0 : -0.1;
    };
    train_teacher(teacher, scfg, setup.task, plan, 20, 250, opts);  // 5000 steps

    StudentConfig greedy_cfg = scfg;
    greedy_cfg.seed = 99;
    Student student =
        init_student(greedy_cfg, setup.task.train.n_features(), setup.task.train.n_classes);
    EpisodeOptions greedy;
    greedy.iterations = 100;
    greedy.explore = false;
    greedy.update_teacher = false;
    greedy.reward_hook = opts.reward_hook;
    EpisodeResult ep = run_episode(teacher, student, setup.task, plan, greedy);

    std::size_t hits = 0;
    for (const auto& rec : ep.records) {
        if (rec.center >= threshold) ++hits;
    }
    detail = std::to_string(hits) + "/100 greedy actions in the planted top decile";
    return hits >= 80;
}

bool criterion_planted_dqn(std::string& detail) {
    PlantedSetup setup = planted_setup();
    BatchPlan plan(setup.scores, 20, BatchMode::Disjoint);
    const std::size_t planted = 13;

    StudentConfig scfg;
    scfg.hidden_layers = 2;
    scfg.hidden_nodes = 4;
    scfg.learning_rate = 0.01;
    scfg.seed = 4;

    DqnConfig cfg;
    cfg.n_actions = 20;
    cfg.epsilon_start = 1.0;
    cfg.epsilon_end = 0.05;
    cfg.sync_period = 10;
    cfg.gamma = 0.9;
    cfg.hidden_layers = 2;
    cfg.hidden_nodes = 24;
    cfg.dropout_rate = 0.0;
    cfg.momentum = 0.9;
    cfg.teacher_lr = 0.02;
    cfg.buffer_capacity = 100000;
    cfg.seed = 2;

    Student probe = init_student(scfg, setup.task.train.n_features(), setup.task.train.n_classes);
    DqnTeacher teacher(state_length(probe), cfg);

    DqnEpisodeOptions opts;
    opts.reward_hook = [&](std::size_t action_id, double) {
        return action_id == planted ? 1.0 : -0.1;
    };
    train_teacher_dqn(teacher, scfg, setup.task, plan, 20, 250, opts);  // 5000 steps

    StudentConfig greedy_cfg = scfg;
    greedy_cfg.seed = 98;
    Student student =
        init_student(greedy_cfg, setup.task.train.n_features(), setup.task.train.n_classes);
    DqnEpisodeOptions greedy;
    greedy.iterations = 100;
    greedy.explore = false;
    greedy.update_teacher = false;
    greedy.reward_hook = opts.reward_hook;
    EpisodeResult ep = run_episode_dqn(teacher, student, setup.task, plan, greedy);

    std::size_t hits = 0;
    for (const auto& rec : ep.records) {
        if (rec.action_id == static_cast<int>(planted)) ++hits;
    }
    detail = std::to_string(hits) + "/100 greedy actions picked the planted batch";
    return hits >= 80;
}

bool criterion_planted(std::string& detail) {
    std::string ddpg_detail, dqn_detail;
    const bool ddpg_ok = criterion_planted_ddpg(ddpg_detail);
    const bool dqn_ok = criterion_planted_dqn(dqn_detail);
    detail = "ddpg: " + ddpg_detail + "; dqn: " + dqn_detail;
    return ddpg_ok && dqn_ok;
}

// ---------------------------------------------------------------------------
// 8. Desk-scale ordering against the baselines
// ---------------------------------------------------------------------------

std::string ordering_config_text(std::uint64_t seed) {
    return "experiment = train\n"
           "data.source = synthetic\n"
           "data.synth.classes = 4\n"
           "data.synth.per_class = 500\n"
           "data.synth.dim = 8\n"
           "data.synth.spread = 0.8\n"
           "curriculum.n_batches = 20\n"
           "curriculum.mode = disjoint\n"
           "dae.epochs = 15\n"
           "student.learning_rate = 0.01\n"
           "teacher.kind = ddpg\n"
           "teacher.students = 6\n"
           "teacher.width_max = 600\n"
           "run.iterations = 300\n"
           "seeds.global = " + std::to_string(seed) + "\n";
}

bool criterion_ordering(std::string& detail) {
    std::vector<double> ddpg_best, batchwise_best, curriculum_best;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        ExperimentConfig cfg = ExperimentConfig::from_kv(
            KeyValueConfig::parse_string(ordering_config_text(seed)));
        Pipeline pipe = build_pipeline(cfg);

        Student probe =
            init_student(cfg.student, pipe.task.train.n_features(), pipe.task.train.n_classes);
        DdpgTeacher teacher(state_length(probe), cfg.ddpg);
        EpisodeOptions train_opts;
        train_opts.subsample_seed = cfg.seeds.data;
        train_teacher(teacher, cfg.student, pipe.task, pipe.plan, cfg.teacher_students,
                      cfg.iterations, train_opts);

        StudentConfig greedy_cfg = cfg.student;
        greedy_cfg.seed = cfg.student.seed + cfg.teacher_students;
        Student student =
            init_student(greedy_cfg, pipe.task.train.n_features(), pipe.task.train.n_classes);
        EpisodeOptions greedy;
        greedy.iterations = cfg.iterations;
        greedy.explore = false;
        greedy.update_teacher = false;
        greedy.subsample_seed = cfg.seeds.data;
        EpisodeResult teacher_ep = run_episode(teacher, student, pipe.task, pipe.plan, greedy);
        ddpg_best.push_back(teacher_ep.best_test_acc);

        EpisodeResult bw = baseline_batchwise(cfg.student, pipe.task, cfg.baseline_batch_size,
                                              cfg.iterations, cfg.seeds.data ^ 0x5DEECE66DULL,
                                              cfg.subsample_cap, cfg.seeds.data);
        batchwise_best.push_back(bw.best_test_acc);

        BatchPlan cum_plan(pipe.scores, cfg.n_batches, BatchMode::Cumulative);
        EpisodeResult cur = baseline_curriculum(cfg.student, pipe.task, cum_plan, cfg.iterations,
                                                cfg.subsample_cap, cfg.seeds.data);
        curriculum_best.push_back(cur.best_test_acc);
    }

    auto mean = [](const std::vector<double>& xs) {
        return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    };
    const double m_ddpg = mean(ddpg_best);
    const double m_bw = mean(batchwise_best);
    const double m_cur = mean(curriculum_best);
    std::ostringstream oss;
    oss.precision(4);
    oss << "mean best-test: ddpg " << m_ddpg << ", batchwise " << m_bw << ", curriculum "
        << m_cur;
    if (m_ddpg >= m_bw && m_ddpg >= m_cur) {
        oss << " [ddpg >= both, non-gating expectation met]";
    } else {
        oss << " [non-gating: ddpg not >= both]";
    }
    detail = oss.str();
    return m_ddpg >= m_bw - 0.01 && m_ddpg >= m_cur - 0.01;
}

// ---------------------------------------------------------------------------
// 9. Constrained-mode statistics
// ---------------------------------------------------------------------------

bool criterion_constrained(std::string& detail) {
    Dataset ds = synth_blobs(3, 30, 3, 0.5, 11);
    SplitSpec spec;
    TaskData task = split(ds, spec, 11);
    std::vector<double> scores(task.train.n_rows());
    for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = task.train.features.at(i, 0);
    BatchPlan plan(scores, 5, BatchMode::Disjoint);

    StudentConfig scfg;
    scfg.hidden_layers = 1;
    scfg.hidden_nodes = 4;
    Student student = init_student(scfg, task.train.n_features(), task.train.n_classes);

    DdpgConfig cfg;
    cfg.hidden_layers = 1;
    cfg.hidden_nodes = 8;
    cfg.dropout_rate = 0.0;
    cfg.width_max = 10;
    cfg.seed = 12;
    DdpgTeacher teacher(state_length(student), cfg);

    EpisodeOptions opts;
    opts.iterations = 10000;
    opts.constrained = true;
    opts.update_teacher = false;
    EpisodeResult ep = run_episode(teacher, student, task, plan, opts);
    std::size_t zeros = 0;
    for (const auto& rec : ep.records) {
        if (rec.width == 0) ++zeros;
    }
    const double frac = static_cast<double>(zeros) / 10000.0;
    detail = "width-zero fraction " + std::to_string(frac) + " over 10000 iterations";
    return frac >= 0.995 && frac <= 1.0;
}

// ---------------------------------------------------------------------------
// 10. Perturbation harness
// ---------------------------------------------------------------------------

std::string perturb_config_text(const std::string& out, double sigma) {
    return "experiment = perturb\n"
           "data.source = synthetic\n"
           "data.synth.classes = 3\n"
           "data.synth.per_class = 30\n"
           "data.synth.dim = 4\n"
           "data.synth.spread = 0.5\n"
           "curriculum.n_batches = 5\n"
           "curriculum.use_dae = false\n"
           "student.hidden_layers = 2\n"
           "student.hidden_nodes = 4\n"
           "student.learning_rate = 0.01\n"
           "teacher.kind = ddpg\n"
           "teacher.hidden_layers = 1\n"
           "teacher.hidden_nodes = 8\n"
           "teacher.dropout = 0\n"
           "teacher.students = 2\n"
           "run.iterations = 50\n"
           "perturb.sigma = " + std::to_string(sigma) + "\n"
           "seeds.global = 0\n"
           "out = " + out + "\n";
}

bool criterion_perturb(std::string& detail) {
    const std::string dir_noise = work_dir("perturb_noise");
    RunOutcome noisy = run(ExperimentConfig::from_kv(
        KeyValueConfig::parse_string(perturb_config_text(dir_noise, 0.1))));
    const auto noisy_records = read_jsonl(noisy.runlog_path);
    std::size_t pairs = 0;
    for (const auto& r : noisy_records) {
        if (r.value("record", "") != "pair") continue;
        ++pairs;
        if (!r.contains("center") || !r.contains("center_perturbed")) {
            detail = "pair record missing aligned actions";
            return false;
        }
    }
    if (pairs != 50 || !fs::exists(fs::path(dir_noise) / "pairs.csv")) {
        detail = "perturbed run did not emit 50 aligned pairs";
        return false;
    }
    const double corr = noisy_records.back().at("center_correlation").get<double>();

    const std::string dir_zero = work_dir("perturb_zero");
    RunOutcome zero = run(ExperimentConfig::from_kv(
        KeyValueConfig::parse_string(perturb_config_text(dir_zero, 0.0))));
    for (const auto& r : read_jsonl(zero.runlog_path)) {
        if (r.value("record", "") != "pair") continue;
        if (r.at("center") != r.at("center_perturbed") || r.at("width") != r.at("width_perturbed")) {
            detail = "sigma=0 pair differs";
            return false;
        }
    }
    std::ostringstream oss;
    oss.precision(3);
    oss << "50 aligned pairs at sigma=0.1 (centre correlation " << corr
        << ", non-gating); sigma=0 pairs identical";
    detail = oss.str();
    return true;
}

// ---------------------------------------------------------------------------
// 11. Transfer harness
// ---------------------------------------------------------------------------

bool criterion_transfer(std::string& detail) {
    const std::string dir_a = work_dir("transfer_a");
    const std::string train_text =
        "experiment = train\n"
        "data.source = synthetic\n"
        "data.synth.classes = 3\n"
        "data.synth.per_class = 40\n"
        "data.synth.dim = 8\n"
        "data.synth.spread = 0.6\n"
        "curriculum.n_batches = 10\n"
        "curriculum.use_dae = false\n"
        "student.learning_rate = 0.01\n"
        "teacher.kind = ddpg\n"
        "teacher.students = 2\n"
        "run.iterations = 40\n"
        "seeds.global = 1\n"
        "out = " + dir_a + "\n";
    run(ExperimentConfig::from_kv(KeyValueConfig::parse_string(train_text)));
    const std::string ckpt = dir_a + "/teacher.json";
    const std::uint64_t hash_before = file_hash(ckpt);

    const std::string dir_b = work_dir("transfer_b");
    const std::string transfer_text =
        "experiment = transfer\n"
        "data.source = synthetic\n"
        "data.synth.classes = 2\n"
        "data.synth.per_class = 50\n"
        "data.synth.dim = 12\n"
        "data.synth.spread = 0.6\n"
        "curriculum.n_batches = 10\n"
        "curriculum.use_dae = false\n"
        "student.learning_rate = 0.01\n"
        "teacher.checkpoint = " + ckpt + "\n"
        "run.iterations = 60\n"
        "seeds.global = 2\n"
        "out = " + dir_b + "\n";
    ExperimentConfig cfg = ExperimentConfig::from_kv(KeyValueConfig::parse_string(transfer_text));
    RunOutcome outcome = run(cfg);

    const auto records = read_jsonl(outcome.runlog_path);
    std::size_t iterations = 0;
    Pipeline pipe = build_pipeline(cfg);
    for (const auto& r : records) {
        if (r.value("record", "") != "iteration") continue;
        ++iterations;
        const auto center = r.at("center").get<std::size_t>();
        const auto width = r.at("width").get<std::size_t>();
        if (center >= pipe.task.train.n_rows()) {
            detail = "transfer action centre out of bounds";
            return false;
        }
        if (width > resolve_width_max(cfg.ddpg, pipe.task.train.n_rows())) {
            detail = "transfer action width out of bounds";
            return false;
        }
    }
    if (iterations != 60) {
        detail = "transfer run did not complete all iterations";
        return false;
    }
    const std::uint64_t hash_after = file_hash(ckpt);
    if (hash_before != hash_after) {
        detail = "teacher checkpoint hash changed during transfer";
        return false;
    }
    detail = "8-feature teacher drove a 12-feature task for 60 iterations, checkpoint unchanged";
    return true;
}

// ---------------------------------------------------------------------------
// 12. Determinism
// ---------------------------------------------------------------------------

bool criterion_determinism(std::string& detail) {
    const std::string dir = work_dir("determinism");
    const std::string text =
        "experiment = train\n"
        "data.source = synthetic\n"
        "data.synth.classes = 3\n"
        "data.synth.per_class = 30\n"
        "data.synth.dim = 4\n"
        "data.synth.spread = 0.5\n"
        "curriculum.n_batches = 6\n"
        "student.hidden_layers = 2\n"
        "student.hidden_nodes = 6\n"
        "student.learning_rate = 0.01\n"
        "teacher.kind = ddpg\n"
        "teacher.students = 2\n"
        "dae.epochs = 3\n"
        "run.iterations = 25\n"
        "seeds.global = 3\n"
        "out = " + dir + "\n";
    ExperimentConfig cfg = ExperimentConfig::from_kv(KeyValueConfig::parse_string(text));
    run(cfg);
    const std::string run_first = file_bytes(dir + "/run.jsonl");
    const std::string teacher_first = file_bytes(dir + "/teacher_train.jsonl");
    run(cfg);
    if (file_bytes(dir + "/run.jsonl") != run_first) {
        detail = "run.jsonl differs between identical runs";
        return false;
    }
    if (file_bytes(dir + "/teacher_train.jsonl") != teacher_first) {
        detail = "teacher_train.jsonl differs between identical runs";
        return false;
    }
    detail = "re-run produced byte-identical JSON-lines logs";
    return true;
}

struct Criterion {
    int id;
    std::string name;
    std::function<bool(std::string&)> fn;
    double time_limit_s;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all = {
        {1, "gradient oracle", criterion_gradient_oracle, 30.0},
        {2, "mahalanobis equivalence", criterion_mahalanobis, 5.0},
        {3, "batch-plan algebra", criterion_batch_plans, 5.0},
        {4, "dae training improvement", criterion_dae, 60.0},
        {5, "reward/soft-update/epsilon exactness", criterion_exactness, 5.0},
        {6, "replay statistics", criterion_replay, 10.0},
        {7, "planted-environment convergence", criterion_planted, 600.0},
        {8, "desk-scale ordering vs baselines", criterion_ordering, 600.0},
        {9, "constrained-mode statistics", criterion_constrained, 120.0},
        {10, "perturbation harness", criterion_perturb, 120.0},
        {11, "transfer harness", criterion_transfer, 120.0},
        {12, "determinism", criterion_determinism, 0.0},  // bounded by the run itself
    };
    return all;
}

}  // namespace

int main(int argc, char** argv) {
    int selected = 0;
    if (argc > 1) {
        selected = std::atoi(argv[1]);
        if (selected < 1 || selected > 12) {
            std::cerr << "usage: acceptance [1..12]\n";
            return 2;
        }
    }

    int failures = 0;
    for (const auto& c : criteria()) {
        if (selected != 0 && c.id != selected) continue;
        const auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = c.fn(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
            ok = false;
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (ok && c.time_limit_s > 0.0 && elapsed > c.time_limit_s) {
            ok = false;
            detail += " [exceeded time budget of " + std::to_string(c.time_limit_s) + "s]";
        }
        std::ostringstream line;
        line.precision(1);
        line << std::fixed << (ok ? "[PASS]" : "[FAIL]") << " criterion " << c.id << " ("
             << c.name << "): " << detail << " [" << elapsed << "s]";
        std::cout << line.str() << std::endl;
        if (!ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
