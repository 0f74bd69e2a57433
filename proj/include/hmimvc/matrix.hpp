#pragma once

#include <cmath>
#include <initializer_list>
#include <span>
#include <vector>

#include "hmimvc/common.hpp"

namespace hmimvc {

using Vector = std::vector<double>;

/// Dense row-major matrix of 64-bit reals. Rows hold instances, columns
/// hold features throughout the toolkit.
class Matrix {
public:
    Matrix() = default;
    Matrix(index_t rows, index_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        Matrix m(rows.size(), rows.size() ? rows.begin()->size() : 0);
        index_t i = 0;
        for (const auto& r : rows) {
            if (r.size() != m.cols_) throw std::invalid_argument("from_rows: ragged rows");
            index_t j = 0;
            for (double v : r) m(i, j++) = v;
            ++i;
        }
        return m;
    }

    index_t rows() const { return rows_; }
    index_t cols() const { return cols_; }
    index_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(index_t i, index_t j) { return data_[i * cols_ + j]; }
    double operator()(index_t i, index_t j) const { return data_[i * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& storage() { return data_; }
    const std::vector<double>& storage() const { return data_; }

    std::span<double> row(index_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(index_t i) const { return {data_.data() + i * cols_, cols_}; }

    void fill(double v) { data_.assign(data_.size(), v); }

    bool is_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    bool operator==(const Matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

private:
    index_t rows_ = 0;
    index_t cols_ = 0;
    std::vector<double> data_;
};

/// Sets the size of the worker pool used by matrix products. Reads the
/// HMIMVC_THREADS environment variable on first use; 0 keeps the default.
void set_num_threads(int n);
int num_threads();

// Matrix products. All accumulate serially along k per output element, so
// results are bit-identical for any thread count.
Matrix gemm_nn(const Matrix& a, const Matrix& b);   // a (m×k) · b (k×n)
Matrix gemm_nt(const Matrix& a, const Matrix& b);   // a (m×k) · bᵀ (k×n), b is n×k
Matrix gemm_tn(const Matrix& a, const Matrix& b);   // aᵀ (m×k) · b (k×n), a is k×m

/// y += row_vector broadcast over rows.
void add_row_broadcast(Matrix& y, std::span<const double> v);

Matrix concat_cols(const Matrix& a, const Matrix& b);
void split_cols(const Matrix& ab, index_t a_cols, Matrix& a, Matrix& b);

/// Gathers the given rows of m into a new matrix, in the order of `idx`.
Matrix gather_rows(const Matrix& m, std::span<const index_t> idx);

double squared_distance(std::span<const double> a, std::span<const double> b);
double euclidean_distance(std::span<const double> a, std::span<const double> b);

}  // namespace hmimvc
