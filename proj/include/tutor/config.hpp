#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "tutor/curriculum.hpp"
#include "tutor/ddpg.hpp"
#include "tutor/dqn.hpp"
#include "tutor/student.hpp"

namespace tutor {

// Flat key=value configuration document with dotted section keys and '#'
// comments.
class KeyValueConfig {
public:
    static KeyValueConfig parse_file(const std::string& path);
    static KeyValueConfig parse_string(const std::string& text);

    bool has(const std::string& key) const;
    void set(const std::string& key, const std::string& value);

    std::string get_string(const std::string& key, const std::string& fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    // Sorted key=value lines; the canonical form behind the config hash.
    std::string canonical() const;

    const std::map<std::string, std::string>& entries() const { return entries_; }

private:
    std::map<std::string, std::string> entries_;
};

// FNV-1a over the canonical form, hex-encoded.
std::string config_hash(const KeyValueConfig& kv);

enum class ExperimentKind {
    Train,
    BaselineBatchwise,
    BaselineCurriculum,
    Constrain,
    Perturb,
    Transfer,
    SlowLr,
    Curriculum,  // build and export the plan only
};

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& s);

enum class ScorerKind { Mahalanobis, Cosine };

enum class TeacherKind { Ddpg, Dqn, None };

struct SplitSpec {
    double train_fraction = 0.60;
    double validation_fraction = 0.20;
    double test_fraction = 0.20;
    bool balance_train = true;
};

struct SynthSpec {
    std::size_t n_classes = 4;
    std::size_t n_per_class = 500;
    std::size_t dim = 8;
    double spread = 0.8;
};

struct Seeds {
    std::uint64_t global = 0;
    std::uint64_t data = 1;
    std::uint64_t student = 2;
    std::uint64_t teacher = 3;
};

// Everything a run needs, resolved from a KeyValueConfig.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Train;

    // Dataset: exactly one source.
    std::string csv_path;  // empty means synthetic
    std::string label_column = "label";
    SynthSpec synth;

    SplitSpec split;

    ScorerKind scorer = ScorerKind::Mahalanobis;
    bool use_dae = true;
    std::size_t n_batches = 20;
    BatchMode batch_mode = BatchMode::Disjoint;
    DaeConfig dae;

    StudentConfig student;
    TeacherKind teacher_kind = TeacherKind::Ddpg;
    DdpgConfig ddpg;
    DqnConfig dqn;

    std::size_t teacher_students = 10;  // X
    std::size_t iterations = 300;       // I, also the per-method step budget
    std::size_t baseline_batch_size = 32;
    std::size_t subsample_cap = 1024;   // training-accuracy subsample size
    std::size_t log_thin = 1;           // keep every k-th iteration record

    double perturb_sigma = 0.1;
    double constrain_prob = 0.999;
    double slow_lr_ratio = 10.0;
    std::string teacher_checkpoint;  // transfer/perturb: load instead of training
    bool select_on_validation = false;  // best-checkpoint rule; default mirrors test-set rule

    Seeds seeds;
    std::string out_dir = "runs/out";

    std::string hash;       // config hash of the resolved document
    KeyValueConfig source;  // resolved key-value form

    static ExperimentConfig from_kv(KeyValueConfig kv);
    static ExperimentConfig from_file(const std::string& path);
};

}  // namespace tutor
