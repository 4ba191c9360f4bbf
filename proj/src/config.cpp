#include "tutor/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tutor/error.hpp"

namespace tutor {
namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
}

KeyValueConfig KeyValueConfig::parse_string(const std::string& text) {
    KeyValueConfig kv;
    std::stringstream ss(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        }
        kv.entries_[key] = value;
    }
    return kv;
}

bool KeyValueConfig::has(const std::string& key) const { return entries_.count(key) > 0; }

void KeyValueConfig::set(const std::string& key, const std::string& value) {
    entries_[key] = value;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (...) {
        throw ConfigError("config key '" + key + "': expected an integer, got '" + it->second + "'");
    }
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (...) {
        throw ConfigError("config key '" + key + "': expected an unsigned integer");
    }
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    try {
        std::size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (...) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + it->second + "'");
    }
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

std::string KeyValueConfig::canonical() const {
    std::string out;
    for (const auto& [k, v] : entries_) {
        out += k;
        out += "=";
        out += v;
        out += "\n";
    }
    return out;
}

std::string config_hash(const KeyValueConfig& kv) {
    const std::string text = kv.canonical();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Train: return "train";
        case ExperimentKind::BaselineBatchwise: return "baseline_batchwise";
        case ExperimentKind::BaselineCurriculum: return "baseline_curriculum";
        case ExperimentKind::Constrain: return "constrain";
        case ExperimentKind::Perturb: return "perturb";
        case ExperimentKind::Transfer: return "transfer";
        case ExperimentKind::SlowLr: return "slow_lr";
        case ExperimentKind::Curriculum: return "curriculum";
    }
    return "train";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
    if (s == "train") return ExperimentKind::Train;
    if (s == "baseline_batchwise") return ExperimentKind::BaselineBatchwise;
    if (s == "baseline_curriculum") return ExperimentKind::BaselineCurriculum;
    if (s == "constrain") return ExperimentKind::Constrain;
    if (s == "perturb") return ExperimentKind::Perturb;
    if (s == "transfer") return ExperimentKind::Transfer;
    if (s == "slow_lr") return ExperimentKind::SlowLr;
    if (s == "curriculum") return ExperimentKind::Curriculum;
    throw ConfigError("unknown experiment kind: " + s);
}

ExperimentConfig ExperimentConfig::from_kv(KeyValueConfig kv) {
    ExperimentConfig cfg;
    cfg.kind = experiment_kind_from_string(kv.get_string("experiment", "train"));

    const std::string source = kv.get_string("data.source", "synthetic");
    if (source == "synthetic") {
        cfg.csv_path.clear();
    } else if (source == "csv") {
        cfg.csv_path = kv.get_string("data.csv", "");
        if (cfg.csv_path.empty()) throw ConfigError("data.source=csv requires data.csv");
    } else {
        throw ConfigError("data.source must be 'synthetic' or 'csv'");
    }
    cfg.label_column = kv.get_string("data.label_column", "label");
    cfg.synth.n_classes = kv.get_u64("data.synth.classes", 4);
    cfg.synth.n_per_class = kv.get_u64("data.synth.per_class", 500);
    cfg.synth.dim = kv.get_u64("data.synth.dim", 8);
    cfg.synth.spread = kv.get_double("data.synth.spread", 0.8);

    cfg.split.train_fraction = kv.get_double("split.train", 0.60);
    cfg.split.validation_fraction = kv.get_double("split.validation", 0.20);
    cfg.split.test_fraction = kv.get_double("split.test", 0.20);
    cfg.split.balance_train = kv.get_bool("split.balance_train", true);
    const double total = cfg.split.train_fraction + cfg.split.validation_fraction +
                         cfg.split.test_fraction;
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");

    const std::string scorer = kv.get_string("curriculum.scorer", "mahalanobis");
    if (scorer == "mahalanobis") {
        cfg.scorer = ScorerKind::Mahalanobis;
    } else if (scorer == "cosine") {
        cfg.scorer = ScorerKind::Cosine;
    } else {
        throw ConfigError("curriculum.scorer must be 'mahalanobis' or 'cosine'");
    }
    cfg.use_dae = kv.get_bool("curriculum.use_dae", cfg.scorer == ScorerKind::Mahalanobis);
    cfg.n_batches = kv.get_u64("curriculum.n_batches", 100);
    cfg.batch_mode = batch_mode_from_string(kv.get_string("curriculum.mode", "disjoint"));

    cfg.seeds.global = kv.get_u64("seeds.global", 0);
    cfg.seeds.data = kv.get_u64("seeds.data", cfg.seeds.global + 1);
    cfg.seeds.student = kv.get_u64("seeds.student", cfg.seeds.global + 2);
    cfg.seeds.teacher = kv.get_u64("seeds.teacher", cfg.seeds.global + 3);

    cfg.dae.latent_dim = kv.get_u64("dae.latent_dim", 8);
    cfg.dae.noise = kv.get_double("dae.noise", 0.2);
    cfg.dae.epochs = kv.get_u64("dae.epochs", 30);
    cfg.dae.learning_rate = kv.get_double("dae.learning_rate", 0.01);
    cfg.dae.hidden = kv.get_u64("dae.hidden", 32);
    cfg.dae.batch_size = kv.get_u64("dae.batch_size", 32);
    cfg.dae.seed = kv.get_u64("dae.seed", cfg.seeds.data);

    cfg.student.hidden_layers = kv.get_u64("student.hidden_layers", 2);
    cfg.student.hidden_nodes = kv.get_u64("student.hidden_nodes", 50);
    cfg.student.learning_rate = kv.get_double("student.learning_rate", 0.001);
    cfg.student.seed = kv.get_u64("student.seed", cfg.seeds.student);

    const std::string teacher = kv.get_string("teacher.kind", "ddpg");
    if (teacher == "ddpg") {
        cfg.teacher_kind = TeacherKind::Ddpg;
    } else if (teacher == "dqn") {
        cfg.teacher_kind = TeacherKind::Dqn;
    } else if (teacher == "none") {
        cfg.teacher_kind = TeacherKind::None;
    } else {
        throw ConfigError("teacher.kind must be 'ddpg', 'dqn' or 'none'");
    }

    cfg.ddpg.gamma = kv.get_double("teacher.gamma", 0.95);
    cfg.ddpg.tau = kv.get_double("teacher.tau", 0.005);
    cfg.ddpg.update_frequency = kv.get_u64("teacher.update_frequency", 20);
    cfg.ddpg.replay_batch = kv.get_u64("teacher.replay_batch", 10);
    cfg.ddpg.replay_every = kv.get_u64("teacher.replay_every", 10);
    cfg.ddpg.buffer_capacity = kv.get_u64("teacher.buffer_capacity", 1000000);
    cfg.ddpg.hidden_layers = kv.get_u64("teacher.hidden_layers", 3);
    cfg.ddpg.hidden_nodes = kv.get_u64("teacher.hidden_nodes", 50);
    cfg.ddpg.dropout_rate = kv.get_double("teacher.dropout", 0.2);
    cfg.ddpg.momentum = kv.get_double("teacher.momentum", 0.9);
    cfg.ddpg.teacher_lr = kv.get_double("teacher.lr", 0.01);
    cfg.ddpg.actor_lr_scale = kv.get_double("teacher.actor_lr_scale", 0.1);
    cfg.ddpg.ou_theta = kv.get_double("teacher.ou_theta", 0.15);
    cfg.ddpg.ou_sigma = kv.get_double("teacher.ou_sigma", 0.2);
    cfg.ddpg.ou_sigma_end = kv.get_double("teacher.ou_sigma_end", 0.02);
    cfg.ddpg.width_max = kv.get_u64("teacher.width_max", 0);
    cfg.ddpg.critic_heads = static_cast<int>(kv.get_int("teacher.critic_heads", 2));
    cfg.ddpg.seed = kv.get_u64("teacher.seed", cfg.seeds.teacher);

    cfg.dqn.n_actions = kv.get_u64("curriculum.n_batches", 100);
    cfg.dqn.epsilon_start = kv.get_double("teacher.epsilon_start", 1.0);
    cfg.dqn.epsilon_end = kv.get_double("teacher.epsilon_end", 0.05);
    cfg.dqn.sync_period = kv.get_u64("teacher.sync_period", 10);
    cfg.dqn.gamma = cfg.ddpg.gamma;
    cfg.dqn.hidden_layers = cfg.ddpg.hidden_layers;
    cfg.dqn.hidden_nodes = cfg.ddpg.hidden_nodes;
    cfg.dqn.dropout_rate = cfg.ddpg.dropout_rate;
    cfg.dqn.momentum = cfg.ddpg.momentum;
    cfg.dqn.teacher_lr = cfg.ddpg.teacher_lr;
    cfg.dqn.buffer_capacity = cfg.ddpg.buffer_capacity;
    cfg.dqn.seed = cfg.ddpg.seed;

    // Full-scale defaults; desk-scale runs override these in their configs.
    cfg.teacher_students = kv.get_u64("teacher.students", 10000);
    cfg.iterations = kv.get_u64("run.iterations", 100);
    cfg.baseline_batch_size = kv.get_u64("baseline.batch_size", 32);
    cfg.subsample_cap = kv.get_u64("run.subsample_cap", 1024);
    if (cfg.subsample_cap < 1) throw ConfigError("run.subsample_cap must be >= 1");
    cfg.log_thin = kv.get_u64("log.thin", 1);
    if (cfg.log_thin < 1) throw ConfigError("log.thin must be >= 1");
    cfg.perturb_sigma = kv.get_double("perturb.sigma", 0.1);
    cfg.constrain_prob = kv.get_double("constrain.prob", 0.999);
    cfg.slow_lr_ratio = kv.get_double("slow_lr.ratio", 10.0);
    cfg.teacher_checkpoint = kv.get_string("teacher.checkpoint", "");
    cfg.select_on_validation = kv.get_bool("run.select_on_validation", false);
    cfg.out_dir = kv.get_string("out", "runs/out");

    cfg.source = std::move(kv);
    cfg.hash = config_hash(cfg.source);
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    return from_kv(KeyValueConfig::parse_file(path));
}

}  // namespace tutor
