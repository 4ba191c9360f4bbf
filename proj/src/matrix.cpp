#include "tutor/matrix.hpp"

#include <cmath>

namespace tutor {

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return Matrix();
    Matrix m(rows.size(), rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != m.cols_) {
            throw DimensionError("from_rows: ragged row lengths");
        }
        for (std::size_t c = 0; c < m.cols_; ++c) m.at(r, c) = rows[r][c];
    }
    return m;
}

bool Matrix::all_finite() const {
    for (double x : data_) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

Matrix Matrix::matmul(const Matrix& other) const {
    if (cols_ != other.rows_) {
        throw DimensionError("matmul: inner dimensions disagree");
    }
    Matrix out(rows_, other.cols_);
    for (std::size_t i = 0; i < rows_; ++i) {
        const double* a = row_ptr(i);
        double* o = out.row_ptr(i);
        for (std::size_t k = 0; k < cols_; ++k) {
            const double aik = a[k];
            if (aik == 0.0) continue;
            const double* b = other.row_ptr(k);
            for (std::size_t j = 0; j < other.cols_; ++j) o[j] += aik * b[j];
        }
    }
    return out;
}

Matrix Matrix::transposed_matmul(const Matrix& other) const {
    // (this^T * other): this is (k x n), other is (k x m), result (n x m).
    if (rows_ != other.rows_) {
        throw DimensionError("transposed_matmul: row counts disagree");
    }
    Matrix out(cols_, other.cols_);
    for (std::size_t k = 0; k < rows_; ++k) {
        const double* a = row_ptr(k);
        const double* b = other.row_ptr(k);
        for (std::size_t i = 0; i < cols_; ++i) {
            const double aki = a[i];
            if (aki == 0.0) continue;
            double* o = out.row_ptr(i);
            for (std::size_t j = 0; j < other.cols_; ++j) o[j] += aki * b[j];
        }
    }
    return out;
}

Matrix Matrix::matmul_transposed(const Matrix& other) const {
    // (this * other^T): this is (n x k), other is (m x k), result (n x m).
    if (cols_ != other.cols_) {
        throw DimensionError("matmul_transposed: column counts disagree");
    }
    Matrix out(rows_, other.rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        const double* a = row_ptr(i);
        double* o = out.row_ptr(i);
        for (std::size_t j = 0; j < other.rows_; ++j) {
            const double* b = other.row_ptr(j);
            double acc = 0.0;
            for (std::size_t k = 0; k < cols_; ++k) acc += a[k] * b[k];
            o[j] = acc;
        }
    }
    return out;
}

Matrix Matrix::transposed() const {
    Matrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) out.at(j, i) = at(i, j);
    }
    return out;
}

void Matrix::add_row_vector(const std::vector<double>& v) {
    if (v.size() != cols_) {
        throw DimensionError("add_row_vector: length does not match columns");
    }
    for (std::size_t i = 0; i < rows_; ++i) {
        double* r = row_ptr(i);
        for (std::size_t j = 0; j < cols_; ++j) r[j] += v[j];
    }
}

std::vector<double> Matrix::column_sums() const {
    std::vector<double> s(cols_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        const double* r = row_ptr(i);
        for (std::size_t j = 0; j < cols_; ++j) s[j] += r[j];
    }
    return s;
}

std::vector<double> Matrix::column_means() const {
    std::vector<double> s = column_sums();
    if (rows_ == 0) return s;
    for (double& x : s) x /= static_cast<double>(rows_);
    return s;
}

void Matrix::scale(double s) {
    for (double& x : data_) x *= s;
}

void Matrix::add_scaled(const Matrix& other, double s) {
    if (!same_shape(other)) {
        throw DimensionError("add_scaled: shapes disagree");
    }
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * other.data_[i];
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw DimensionError("dot: lengths disagree");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

}  // namespace tutor
