#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tutor/matrix.hpp"

namespace tutor {

// Feature matrix with integer class labels.
struct Dataset {
    Matrix features;             // n x d
    std::vector<int> labels;     // class ids in [0, n_classes)
    std::size_t n_classes = 0;
    std::vector<std::string> feature_names;  // optional, kept through ingest

    std::size_t n_rows() const { return features.rows(); }
    std::size_t n_features() const { return features.cols(); }

    void validate() const;
    Dataset select_rows(const std::vector<std::size_t>& indices) const;
};

// Stratified train/validation/test material for one task.
struct TaskData {
    Dataset train;
    Dataset validation;
    Dataset test;
};

// Per-column z-score parameters fitted on one dataset and applied to others.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> stddev;  // constant columns keep stddev 1

    static Standardizer fit(const Matrix& features);
    Matrix apply(const Matrix& features) const;
};

// CSV with a header row. The label column is picked by name; every other
// column must be numeric. Missing values are rejected.
Dataset read_csv_dataset(const std::string& path, const std::string& label_column);

void write_csv_dataset(const std::string& path, const Dataset& ds);

// Raw CSV ingestion that one-hot expands non-numeric feature columns
// (lexicographic category order) and maps labels to dense ids. Label values
// that all parse as non-negative integers are kept as-is; otherwise the
// distinct values are sorted lexicographically and numbered from 0.
Dataset ingest_csv(const std::string& path, const std::string& label_column);

}  // namespace tutor
