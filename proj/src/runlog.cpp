#include "tutor/runlog.hpp"

#include <algorithm>
#include <fstream>

#include "tutor/error.hpp"

namespace tutor {

using nlohmann::json;

RunLog::RunLog(std::string path, std::string config_hash)
    : path_(std::move(path)), config_hash_(std::move(config_hash)) {
    std::ofstream out(path_, std::ios::trunc);
    if (!out) throw IoError("cannot open run log for writing: " + path_);
}

namespace {

void append_line(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw IoError("cannot append to run log: " + path);
    out << j.dump() << "\n";
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace

json iteration_to_json(const IterationRecord& rec) {
    json j;
    j["record"] = "iteration";
    j["student_id"] = rec.student_id;
    j["iter"] = rec.iter;
    if (rec.action_id >= 0) {
        j["action_id"] = rec.action_id;
        j["epsilon"] = rec.epsilon;
    } else {
        j["center"] = rec.center;
        j["width"] = rec.width;
    }
    j["reward"] = rec.reward;
    j["train_acc"] = rec.train_acc;
    j["val_acc"] = rec.val_acc;
    j["test_acc"] = rec.test_acc;
    j["mode"] = rec.mode;
    return j;
}

void RunLog::append_iteration(const IterationRecord& rec) {
    if (closed_) throw PreconditionError("RunLog: summary already written");
    json j = iteration_to_json(rec);
    j["config_hash"] = config_hash_;
    append_line(path_, j);
    ++n_records_;
}

void RunLog::append_record(json j) {
    if (closed_) throw PreconditionError("RunLog: summary already written");
    j["config_hash"] = config_hash_;
    append_line(path_, j);
    ++n_records_;
}

void RunLog::finish_summary(double best_test_acc, std::size_t best_iter, json extra) {
    if (closed_) throw PreconditionError("RunLog: summary already written");
    json j = std::move(extra);
    j["record"] = "summary";
    j["best_test_acc"] = best_test_acc;
    j["best_iter"] = best_iter;
    j["config_hash"] = config_hash_;
    append_line(path_, j);
    closed_ = true;
}

std::vector<json> read_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::vector<json> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            records.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw IoError(path + ": bad JSON at line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

std::size_t emit_policy_table(const std::string& runlog_path, const std::string& csv_path) {
    const auto records = read_jsonl(runlog_path);
    if (records.empty()) throw PreconditionError("emit_policy_table: empty run log");

    struct Row {
        std::size_t iter;
        long long center_or_action;
        std::size_t width;
        double reward;
        double test_acc;
    };
    std::vector<Row> rows;
    for (const auto& r : records) {
        if (r.value("record", "") != "iteration") continue;
        Row row;
        row.iter = r.at("iter").get<std::size_t>();
        if (r.contains("action_id")) {
            row.center_or_action = r.at("action_id").get<long long>();
            row.width = 0;
        } else {
            row.center_or_action = r.at("center").get<long long>();
            row.width = r.at("width").get<std::size_t>();
        }
        row.reward = r.at("reward").get<double>();
        row.test_acc = r.at("test_acc").get<double>();
        rows.push_back(row);
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.iter < b.iter; });

    std::ofstream out(csv_path);
    if (!out) throw IoError("cannot open for writing: " + csv_path);
    out.precision(17);
    out << "iter,center_or_action,width,reward,test_acc\n";
    for (const auto& row : rows) {
        out << row.iter << "," << row.center_or_action << "," << row.width << "," << row.reward
            << "," << row.test_acc << "\n";
    }
    if (!out) throw IoError("write failed: " + csv_path);
    return rows.size();
}

}  // namespace tutor
