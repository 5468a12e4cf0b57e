#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace egan::nn {

// Dense row-major matrix of doubles. Rows are samples when used as a batch.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix from_row(std::span<const double> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    void fill(double value);

    // Columns [first, first + count) as a new matrix.
    Matrix col_block(std::size_t first, std::size_t count) const;
    // Rows at the given indices, in order.
    Matrix gather_rows(std::span<const std::size_t> indices) const;

    bool all_finite() const noexcept;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// out = a * b^T (a: n x k, b: m x k) -> n x m.
Matrix matmul_transposed(const Matrix& a, const Matrix& b);
// out = a * b (a: n x k, b: k x m).
Matrix matmul(const Matrix& a, const Matrix& b);
// out = a^T * b (a: n x k, b: n x m) -> k x m.
Matrix transposed_matmul(const Matrix& a, const Matrix& b);

// Horizontal concatenation; row counts must agree.
Matrix hconcat(const Matrix& left, const Matrix& right);

}  // namespace egan::nn
