#pragma once

#include <string>
#include <vector>

#include "tutor/ddpg.hpp"

#include <json.hpp>

namespace tutor {

// Append-only JSON-lines run log. Each record carries the config hash; the
// final record is a summary {best_test_acc, best_iter, config_hash}.
class RunLog {
public:
    RunLog(std::string path, std::string config_hash);

    void append_iteration(const IterationRecord& rec);
    void append_record(nlohmann::json j);  // free-form record (pairs, metadata)
    void finish_summary(double best_test_acc, std::size_t best_iter,
                        nlohmann::json extra = nlohmann::json::object());

    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::string config_hash_;
    std::size_t n_records_ = 0;
    bool closed_ = false;
};

nlohmann::json iteration_to_json(const IterationRecord& rec);

// Reads every record of a JSON-lines file.
std::vector<nlohmann::json> read_jsonl(const std::string& path);

// CSV with columns {iter, center_or_action, width, reward, test_acc}, sorted
// by iter; summary records are skipped. Returns the number of rows written.
std::size_t emit_policy_table(const std::string& runlog_path, const std::string& csv_path);

}  // namespace tutor
