#pragma once

#include <string>

#include "tutor/net.hpp"

#include <json.hpp>

namespace tutor {

// Versioned flat schema shared by every checkpoint in the project:
// {format_version, spec, weights (row-major), biases, optional velocity}.
inline constexpr int kCheckpointFormatVersion = 1;

nlohmann::json net_to_json(const DenseNet& net);
DenseNet net_from_json(const nlohmann::json& j);  // validates shapes

nlohmann::json optimizer_to_json(const SgdMomentum& opt);
SgdMomentum optimizer_from_json(const nlohmann::json& j, const DenseNet& net);

void write_json_file(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::string& path);

}  // namespace tutor
