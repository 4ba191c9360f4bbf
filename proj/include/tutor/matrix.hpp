#pragma once

#include <cstddef>
#include <vector>

#include "tutor/error.hpp"

namespace tutor {

// Dense row-major matrix of doubles. All numeric work in the project runs
// through this type; shapes are validated at operation boundaries.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* row_ptr(std::size_t r) { return data_.data() + r * cols_; }
    const double* row_ptr(std::size_t r) const { return data_.data() + r * cols_; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    std::vector<double> row(std::size_t r) const {
        return std::vector<double>(row_ptr(r), row_ptr(r) + cols_);
    }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    bool all_finite() const;

    // this (n x k) times other (k x m) -> (n x m)
    Matrix matmul(const Matrix& other) const;
    // this^T (k x n -> n rows become cols) times other (k x m) -> (n x m)
    Matrix transposed_matmul(const Matrix& other) const;
    // this (n x k) times other^T (m x k) -> (n x m)
    Matrix matmul_transposed(const Matrix& other) const;

    Matrix transposed() const;

    void add_row_vector(const std::vector<double>& v);  // broadcast add over rows
    std::vector<double> column_sums() const;
    std::vector<double> column_means() const;

    void scale(double s);
    void add_scaled(const Matrix& other, double s);  // this += s * other

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Vector helpers shared across modules.
double dot(const std::vector<double>& a, const std::vector<double>& b);
double norm(const std::vector<double>& v);

}  // namespace tutor
