#include "egan/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "egan/errors.hpp"

namespace egan::nn {

namespace {

std::string dims(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) {
            throw ShapeError("ragged matrix literal");
        }
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::from_row(std::span<const double> values) {
    Matrix m(1, values.size());
    std::copy(values.begin(), values.end(), m.data_.begin());
    return m;
}

void Matrix::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

Matrix Matrix::col_block(std::size_t first, std::size_t count) const {
    if (first + count > cols_) {
        throw ShapeError("column block out of range for " + dims(*this));
    }
    Matrix out(rows_, count);
    for (std::size_t r = 0; r < rows_; ++r) {
        std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(r * cols_ + first), count,
                    out.data_.begin() + static_cast<std::ptrdiff_t>(r * count));
    }
    return out;
}

Matrix Matrix::gather_rows(std::span<const std::size_t> indices) const {
    Matrix out(indices.size(), cols_);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= rows_) {
            throw ShapeError("row index out of range");
        }
        auto src = row(indices[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

bool Matrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix matmul_transposed(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        throw ShapeError("matmul_transposed: " + dims(a) + " vs " + dims(b));
    }
    Matrix out(a.rows(), b.rows());
    const std::size_t k = a.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ar = a.row(i).data();
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const double* br = b.row(j).data();
            double acc = 0.0;
            for (std::size_t t = 0; t < k; ++t) {
                acc += ar[t] * br[t];
            }
            out(i, j) = acc;
        }
    }
    return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: " + dims(a) + " vs " + dims(b));
    }
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* orow = out.row(i).data();
        for (std::size_t t = 0; t < a.cols(); ++t) {
            const double av = a(i, t);
            const double* brow = b.row(t).data();
            for (std::size_t j = 0; j < b.cols(); ++j) {
                orow[j] += av * brow[j];
            }
        }
    }
    return out;
}

Matrix transposed_matmul(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) {
        throw ShapeError("transposed_matmul: " + dims(a) + " vs " + dims(b));
    }
    Matrix out(a.cols(), b.cols());
    for (std::size_t n = 0; n < a.rows(); ++n) {
        const double* arow = a.row(n).data();
        const double* brow = b.row(n).data();
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double av = arow[i];
            double* orow = out.row(i).data();
            for (std::size_t j = 0; j < b.cols(); ++j) {
                orow[j] += av * brow[j];
            }
        }
    }
    return out;
}

Matrix hconcat(const Matrix& left, const Matrix& right) {
    if (left.rows() != right.rows()) {
        throw ShapeError("hconcat: " + dims(left) + " vs " + dims(right));
    }
    Matrix out(left.rows(), left.cols() + right.cols());
    for (std::size_t r = 0; r < left.rows(); ++r) {
        auto dst = out.row(r);
        std::copy(left.row(r).begin(), left.row(r).end(), dst.begin());
        std::copy(right.row(r).begin(), right.row(r).end(),
                  dst.begin() + static_cast<std::ptrdiff_t>(left.cols()));
    }
    return out;
}

}  // namespace egan::nn
