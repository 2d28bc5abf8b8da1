#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace seqtag {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles. The shape is fixed at construction.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    void fill(double v);
    bool same_shape(const Matrix& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Kernels. All of them accumulate into `out` and throw shape_mismatch when the
// operand sizes disagree.

/// out += x * W   (x has W.rows() entries, out has W.cols()).
void add_row_times(std::span<const double> x, const Matrix& w, std::span<double> out);

/// out += W * y   (y has W.cols() entries, out has W.rows()).
void add_times_col(const Matrix& w, std::span<const double> y, std::span<double> out);

/// G += x (outer) y.
void add_outer(Matrix& g, std::span<const double> x, std::span<const double> y);

void require_size(std::span<const double> v, std::size_t n, const char* what);

}  // namespace seqtag
