// Command-line front end: experiments, dataset ingestion, curriculum export.

#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tutor/config.hpp"
#include "tutor/dataset.hpp"
#include "tutor/error.hpp"
#include "tutor/experiments.hpp"
#include "tutor/runlog.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct CommonArgs {
    std::string config_path;
    long long seed = -1;
    std::string out_dir;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "path to a key=value config file")->required();
    cmd->add_option("--seed", args.seed, "override seeds.global");
    cmd->add_option("--out", args.out_dir, "override the output directory");
}

tutor::ExperimentConfig load_config(const CommonArgs& args, const std::string& kind) {
    tutor::KeyValueConfig kv = tutor::KeyValueConfig::parse_file(args.config_path);
    if (!kind.empty()) kv.set("experiment", kind);
    if (args.seed >= 0) kv.set("seeds.global", std::to_string(args.seed));
    if (!args.out_dir.empty()) kv.set("out", args.out_dir);
    return tutor::ExperimentConfig::from_kv(std::move(kv));
}

int dispatch(const tutor::ExperimentConfig& cfg) {
    const tutor::RunOutcome outcome = tutor::run(cfg);
    json report;
    report["out_dir"] = outcome.out_dir;
    report["runlog"] = outcome.runlog_path;
    report["best_test_acc"] = outcome.best_test_acc;
    report["config_hash"] = cfg.hash;
    std::cout << report.dump() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"teacher-guided curriculum training for MLP classifiers"};
    app.require_subcommand(1);

    CommonArgs ingest_args, curriculum_args, train_args, baseline_args, transfer_args,
        perturb_args, constrain_args, slow_lr_args;
    std::string baseline_variant = "batchwise";
    std::string export_log, export_csv;

    auto* ingest = app.add_subcommand("ingest", "one-hot expand a raw CSV into a numeric dataset");
    add_common(ingest, ingest_args);

    auto* curriculum = app.add_subcommand("curriculum", "score the data and export the batch plan");
    add_common(curriculum, curriculum_args);

    auto* train = app.add_subcommand("train", "train a teacher, then a final greedy student");
    add_common(train, train_args);

    auto* baseline = app.add_subcommand("baseline", "train a student without a teacher");
    add_common(baseline, baseline_args);
    baseline->add_option("--variant", baseline_variant, "batchwise or curriculum")
        ->check(CLI::IsMember({"batchwise", "curriculum"}));

    auto* transfer = app.add_subcommand("transfer", "apply a saved teacher to a new task");
    add_common(transfer, transfer_args);

    auto* perturb = app.add_subcommand("perturb", "compare actions on clean vs noised states");
    add_common(perturb, perturb_args);

    auto* constrain = app.add_subcommand("constrain", "train with the width forced to zero");
    add_common(constrain, constrain_args);

    auto* slow_lr = app.add_subcommand("slow-lr", "constrained run with the student lr divided");
    add_common(slow_lr, slow_lr_args);

    std::string export_config;
    auto* exporter = app.add_subcommand("export", "emit a policy-table CSV from a run log");
    exporter->add_option("--config", export_config, "config whose run log should be exported");
    exporter->add_option("--log", export_log, "run log (JSON lines)");
    exporter->add_option("--out", export_csv, "output CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed()) {
            tutor::ExperimentConfig cfg = load_config(ingest_args, "");
            if (cfg.csv_path.empty()) {
                throw tutor::ConfigError("ingest requires data.source = csv and data.csv");
            }
            tutor::Dataset ds = tutor::ingest_csv(cfg.csv_path, cfg.label_column);
            fs::create_directories(cfg.out_dir);
            const std::string out_csv = (fs::path(cfg.out_dir) / "ingested.csv").string();
            tutor::write_csv_dataset(out_csv, ds);
            json report;
            report["out"] = out_csv;
            report["rows"] = ds.n_rows();
            report["features"] = ds.n_features();
            report["classes"] = ds.n_classes;
            std::cout << report.dump() << "\n";
            return 0;
        }
        if (curriculum->parsed()) return dispatch(load_config(curriculum_args, "curriculum"));
        if (train->parsed()) return dispatch(load_config(train_args, "train"));
        if (baseline->parsed()) {
            return dispatch(load_config(baseline_args, "baseline_" + baseline_variant));
        }
        if (transfer->parsed()) return dispatch(load_config(transfer_args, "transfer"));
        if (perturb->parsed()) return dispatch(load_config(perturb_args, "perturb"));
        if (constrain->parsed()) return dispatch(load_config(constrain_args, "constrain"));
        if (slow_lr->parsed()) return dispatch(load_config(slow_lr_args, "slow_lr"));
        if (exporter->parsed()) {
            if (export_log.empty() || export_csv.empty()) {
                if (export_config.empty()) {
                    throw tutor::ConfigError("export needs --log/--out or --config");
                }
                tutor::ExperimentConfig cfg = tutor::ExperimentConfig::from_file(export_config);
                if (export_log.empty()) {
                    export_log = (fs::path(cfg.out_dir) / "run.jsonl").string();
                }
                if (export_csv.empty()) {
                    export_csv = (fs::path(cfg.out_dir) / "policy_table.csv").string();
                }
            }
            const std::size_t rows = tutor::emit_policy_table(export_log, export_csv);
            json report;
            report["out"] = export_csv;
            report["rows"] = rows;
            std::cout << report.dump() << "\n";
            return 0;
        }
    } catch (const tutor::TutorError& e) {
        json err;
        err["error"] = "tutor";
        err["message"] = e.what();
        std::cerr << err.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        json err;
        err["error"] = "internal";
        err["message"] = e.what();
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 0;
}
