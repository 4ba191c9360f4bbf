#include "tutor/checkpoint.hpp"

#include <fstream>

#include "tutor/error.hpp"

namespace tutor {

using nlohmann::json;

json net_to_json(const DenseNet& net) {
    json j;
    j["format_version"] = kCheckpointFormatVersion;
    j["spec"] = {
        {"layer_sizes", net.spec.layer_sizes},
        {"output_head", to_string(net.spec.output_head)},
        {"dropout_rate", net.spec.dropout_rate},
    };
    json weights = json::array();
    for (const auto& w : net.weights) weights.push_back(w.data());
    j["weights"] = std::move(weights);
    j["biases"] = net.biases;
    return j;
}

DenseNet net_from_json(const json& j) {
    if (!j.contains("format_version") || j.at("format_version").get<int>() != kCheckpointFormatVersion) {
        throw IoError("checkpoint: unsupported format version");
    }
    DenseNetSpec spec;
    const json& js = j.at("spec");
    spec.layer_sizes = js.at("layer_sizes").get<std::vector<std::size_t>>();
    spec.output_head = output_head_from_string(js.at("output_head").get<std::string>());
    spec.dropout_rate = js.at("dropout_rate").get<double>();
    spec.validate();

    DenseNet net;
    net.spec = spec;
    const json& jw = j.at("weights");
    const json& jb = j.at("biases");
    if (jw.size() != spec.layer_sizes.size() - 1 || jb.size() != jw.size()) {
        throw IoError("checkpoint: layer count does not match spec");
    }
    for (std::size_t k = 0; k + 1 < spec.layer_sizes.size(); ++k) {
        const std::size_t rows = spec.layer_sizes[k];
        const std::size_t cols = spec.layer_sizes[k + 1];
        auto flat = jw.at(k).get<std::vector<double>>();
        if (flat.size() != rows * cols) {
            throw IoError("checkpoint: weight array size does not match spec shape");
        }
        Matrix w(rows, cols);
        w.data() = std::move(flat);
        if (!w.all_finite()) throw IoError("checkpoint: non-finite weight entry");
        net.weights.push_back(std::move(w));
        auto bias = jb.at(k).get<std::vector<double>>();
        if (bias.size() != cols) {
            throw IoError("checkpoint: bias length does not match spec shape");
        }
        net.biases.push_back(std::move(bias));
    }
    return net;
}

json optimizer_to_json(const SgdMomentum& opt) {
    json j;
    j["learning_rate"] = opt.learning_rate;
    j["momentum"] = opt.momentum;
    json vw = json::array();
    for (const auto& v : opt.velocity_w) vw.push_back(v.data());
    j["velocity_weights"] = std::move(vw);
    j["velocity_biases"] = opt.velocity_b;
    return j;
}

SgdMomentum optimizer_from_json(const json& j, const DenseNet& net) {
    SgdMomentum opt = SgdMomentum::create(net, j.at("learning_rate").get<double>(),
                                          j.at("momentum").get<double>());
    const json& vw = j.at("velocity_weights");
    const json& vb = j.at("velocity_biases");
    if (vw.size() != net.weights.size() || vb.size() != net.weights.size()) {
        throw IoError("checkpoint: optimizer layer count does not match net");
    }
    for (std::size_t k = 0; k < net.weights.size(); ++k) {
        auto flat = vw.at(k).get<std::vector<double>>();
        if (flat.size() != net.weights[k].size()) {
            throw IoError("checkpoint: velocity shape does not match weights");
        }
        opt.velocity_w[k].data() = std::move(flat);
        auto bias = vb.at(k).get<std::vector<double>>();
        if (bias.size() != net.biases[k].size()) {
            throw IoError("checkpoint: velocity bias length mismatch");
        }
        opt.velocity_b[k] = std::move(bias);
    }
    return opt;
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
    if (!out) throw IoError("write failed: " + path);
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw IoError("invalid JSON in " + path + ": " + e.what());
    }
    return j;
}

}  // namespace tutor
