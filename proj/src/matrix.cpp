#include "seqtag/matrix.hpp"

#include <algorithm>
#include <string>

#include "seqtag/error.hpp"

namespace seqtag {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void require_size(std::span<const double> v, std::size_t n, const char* what) {
    if (v.size() != n) {
        throw Error(ErrorCode::shape_mismatch, std::string(what) + ": expected length " +
                                                   std::to_string(n) + ", got " +
                                                   std::to_string(v.size()));
    }
}

void add_row_times(std::span<const double> x, const Matrix& w, std::span<double> out) {
    require_size(x, w.rows(), "add_row_times lhs");
    require_size(out, w.cols(), "add_row_times out");
    const std::size_t cols = w.cols();
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double xk = x[k];
        if (xk == 0.0) continue;
        const double* wr = w.row(k).data();
        for (std::size_t j = 0; j < cols; ++j) out[j] += xk * wr[j];
    }
}

void add_times_col(const Matrix& w, std::span<const double> y, std::span<double> out) {
    require_size(y, w.cols(), "add_times_col rhs");
    require_size(out, w.rows(), "add_times_col out");
    const std::size_t cols = w.cols();
    for (std::size_t r = 0; r < w.rows(); ++r) {
        const double* wr = w.row(r).data();
        double acc = 0.0;
        for (std::size_t j = 0; j < cols; ++j) acc += wr[j] * y[j];
        out[r] += acc;
    }
}

void add_outer(Matrix& g, std::span<const double> x, std::span<const double> y) {
    require_size(x, g.rows(), "add_outer lhs");
    require_size(y, g.cols(), "add_outer rhs");
    const std::size_t cols = g.cols();
    for (std::size_t r = 0; r < x.size(); ++r) {
        const double xr = x[r];
        if (xr == 0.0) continue;
        double* gr = g.row(r).data();
        for (std::size_t j = 0; j < cols; ++j) gr[j] += xr * y[j];
    }
}

}  // namespace seqtag
