#include "tutor/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "tutor/error.hpp"

namespace tutor {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

bool parse_double(const std::string& s, double& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    std::size_t pos = 0;
    try {
        out = std::stod(t, &pos);
    } catch (...) {
        return false;
    }
    return pos == t.size();
}

bool parse_nonneg_int(const std::string& s, long& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    std::size_t pos = 0;
    try {
        out = std::stol(t, &pos);
    } catch (...) {
        return false;
    }
    return pos == t.size() && out >= 0;
}

struct RawTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::size_t label_index = 0;
};

RawTable read_raw_csv(const std::string& path, const std::string& label_column) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    RawTable table;
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty CSV: " + path);
    table.header = split_csv_line(line);
    for (auto& h : table.header) h = trim(h);

    auto it = std::find(table.header.begin(), table.header.end(), label_column);
    if (it == table.header.end()) {
        throw ConfigError("label column '" + label_column + "' not found in " + path);
    }
    table.label_index = static_cast<std::size_t>(it - table.header.begin());

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != table.header.size()) {
            throw IoError(path + ": line " + std::to_string(line_no) +
                          " has a different field count than the header");
        }
        for (auto& f : fields) {
            f = trim(f);
            if (f.empty()) {
                throw IoError(path + ": missing value at line " + std::to_string(line_no));
            }
        }
        table.rows.push_back(std::move(fields));
    }
    if (table.rows.empty()) throw IoError("no data rows in " + path);
    return table;
}

std::vector<int> map_labels(const std::vector<std::string>& raw, std::size_t& n_classes) {
    bool all_ints = true;
    long max_id = 0;
    std::vector<long> ints(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (!parse_nonneg_int(raw[i], ints[i])) {
            all_ints = false;
            break;
        }
        max_id = std::max(max_id, ints[i]);
    }
    std::vector<int> labels(raw.size());
    if (all_ints) {
        n_classes = static_cast<std::size_t>(max_id) + 1;
        for (std::size_t i = 0; i < raw.size(); ++i) labels[i] = static_cast<int>(ints[i]);
        return labels;
    }
    std::set<std::string> distinct(raw.begin(), raw.end());
    std::map<std::string, int> ids;
    int next = 0;
    for (const auto& v : distinct) ids[v] = next++;
    n_classes = distinct.size();
    for (std::size_t i = 0; i < raw.size(); ++i) labels[i] = ids[raw[i]];
    return labels;
}

}  // namespace

void Dataset::validate() const {
    if (labels.size() != features.rows()) {
        throw DimensionError("Dataset: label count does not match row count");
    }
    if (!features.all_finite()) {
        throw NumericError("Dataset: non-finite feature entry");
    }
    for (int y : labels) {
        if (y < 0 || static_cast<std::size_t>(y) >= n_classes) {
            throw ConfigError("Dataset: label out of range [0, n_classes)");
        }
    }
}

Dataset Dataset::select_rows(const std::vector<std::size_t>& indices) const {
    Dataset out;
    out.n_classes = n_classes;
    out.feature_names = feature_names;
    out.features = Matrix(indices.size(), features.cols());
    out.labels.reserve(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const std::size_t src = indices[i];
        if (src >= n_rows()) throw BoundsError("select_rows: index out of range");
        std::copy(features.row_ptr(src), features.row_ptr(src) + features.cols(),
                  out.features.row_ptr(i));
        out.labels.push_back(labels[src]);
    }
    return out;
}

Standardizer Standardizer::fit(const Matrix& features) {
    if (features.rows() == 0) throw PreconditionError("Standardizer: empty feature matrix");
    Standardizer s;
    s.mean = features.column_means();
    s.stddev.assign(features.cols(), 0.0);
    for (std::size_t i = 0; i < features.rows(); ++i) {
        const double* r = features.row_ptr(i);
        for (std::size_t j = 0; j < features.cols(); ++j) {
            const double d = r[j] - s.mean[j];
            s.stddev[j] += d * d;
        }
    }
    const double denom = features.rows() > 1 ? static_cast<double>(features.rows() - 1) : 1.0;
    for (std::size_t j = 0; j < features.cols(); ++j) {
        s.stddev[j] = std::sqrt(s.stddev[j] / denom);
        if (s.stddev[j] < 1e-12) s.stddev[j] = 1.0;  // constant column maps to 0
    }
    return s;
}

Matrix Standardizer::apply(const Matrix& features) const {
    if (features.cols() != mean.size()) {
        throw DimensionError("Standardizer: feature width does not match fit");
    }
    Matrix out = features;
    for (std::size_t i = 0; i < out.rows(); ++i) {
        double* r = out.row_ptr(i);
        for (std::size_t j = 0; j < out.cols(); ++j) {
            r[j] = (r[j] - mean[j]) / stddev[j];
        }
    }
    return out;
}

Dataset read_csv_dataset(const std::string& path, const std::string& label_column) {
    RawTable table = read_raw_csv(path, label_column);
    const std::size_t d = table.header.size() - 1;

    Dataset ds;
    ds.features = Matrix(table.rows.size(), d);
    for (std::size_t j = 0, out = 0; j < table.header.size(); ++j) {
        if (j == table.label_index) continue;
        ds.feature_names.push_back(table.header[j]);
        ++out;
    }

    std::vector<std::string> raw_labels;
    raw_labels.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        std::size_t out = 0;
        for (std::size_t j = 0; j < table.header.size(); ++j) {
            if (j == table.label_index) {
                raw_labels.push_back(table.rows[i][j]);
                continue;
            }
            double v;
            if (!parse_double(table.rows[i][j], v)) {
                throw IoError(path + ": non-numeric value '" + table.rows[i][j] +
                              "' in column '" + table.header[j] +
                              "' (run ingest to one-hot expand categoricals)");
            }
            ds.features.at(i, out++) = v;
        }
    }
    ds.labels = map_labels(raw_labels, ds.n_classes);
    ds.validate();
    return ds;
}

void write_csv_dataset(const std::string& path, const Dataset& ds) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    for (std::size_t j = 0; j < ds.n_features(); ++j) {
        if (j < ds.feature_names.size() && !ds.feature_names[j].empty()) {
            out << ds.feature_names[j];
        } else {
            out << "f" << j;
        }
        out << ",";
    }
    out << "label\n";
    out.precision(17);
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        for (std::size_t j = 0; j < ds.n_features(); ++j) {
            out << ds.features.at(i, j) << ",";
        }
        out << ds.labels[i] << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

Dataset ingest_csv(const std::string& path, const std::string& label_column) {
    RawTable table = read_raw_csv(path, label_column);
    const std::size_t n = table.rows.size();

    // Column is numeric iff every value parses as a double.
    std::vector<bool> numeric(table.header.size(), true);
    for (std::size_t j = 0; j < table.header.size(); ++j) {
        if (j == table.label_index) continue;
        for (std::size_t i = 0; i < n; ++i) {
            double v;
            if (!parse_double(table.rows[i][j], v)) {
                numeric[j] = false;
                break;
            }
        }
    }

    // Expanded column layout: numeric columns pass through, categorical
    // columns become one indicator per category in lexicographic order.
    std::vector<std::string> out_names;
    std::vector<std::map<std::string, std::size_t>> category_offsets(table.header.size());
    std::size_t width = 0;
    for (std::size_t j = 0; j < table.header.size(); ++j) {
        if (j == table.label_index) continue;
        if (numeric[j]) {
            out_names.push_back(table.header[j]);
            ++width;
        } else {
            std::set<std::string> cats;
            for (std::size_t i = 0; i < n; ++i) cats.insert(table.rows[i][j]);
            for (const auto& c : cats) {
                category_offsets[j][c] = width;
                out_names.push_back(table.header[j] + "=" + c);
                ++width;
            }
        }
    }

    Dataset ds;
    ds.feature_names = std::move(out_names);
    ds.features = Matrix(n, width);
    std::vector<std::string> raw_labels;
    raw_labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t out = 0;
        for (std::size_t j = 0; j < table.header.size(); ++j) {
            if (j == table.label_index) {
                raw_labels.push_back(table.rows[i][j]);
                continue;
            }
            if (numeric[j]) {
                double v;
                parse_double(table.rows[i][j], v);
                ds.features.at(i, out++) = v;
            } else {
                ds.features.at(i, category_offsets[j].at(table.rows[i][j])) = 1.0;
                out += category_offsets[j].size();
            }
        }
    }
    ds.labels = map_labels(raw_labels, ds.n_classes);
    ds.validate();
    return ds;
}

}  // namespace tutor
