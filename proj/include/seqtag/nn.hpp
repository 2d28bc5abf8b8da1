#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "seqtag/matrix.hpp"
#include "seqtag/rng.hpp"

namespace seqtag {

double logistic(double x) noexcept;
double identity(double x) noexcept;
// tanh is std::tanh

/// Max-subtracted softmax.
Vector softmax(std::span<const double> logits);
void softmax_into(std::span<const double> logits, std::span<double> out);

/// Every entry drawn from U[lo, hi). Throws invalid_argument if lo >= hi.
Matrix uniform_init(std::size_t rows, std::size_t cols, double lo, double hi, Rng& rng);
void uniform_fill(Matrix& m, double lo, double hi, Rng& rng);

/// A trainable weight with its gradient accumulator.
///
/// Row-sparse parameters (the embedding table) record which rows received
/// gradient so that the update and the reset only visit those rows.
struct Parameter {
    std::string name;
    Matrix value;
    Matrix grad;
    bool row_sparse = false;
    std::vector<std::size_t> touched_rows;

    Parameter() = default;
    Parameter(std::string name, std::size_t rows, std::size_t cols, bool row_sparse = false);

    void mark_row(std::size_t r);
    void zero_grad();
};

struct SgdOptions {
    double learning_rate = 0.01;
    /// Elementwise gradient clip; 0 disables clipping.
    double clip = 0.0;
};

/// value -= lr * grad for every parameter, then zero the grads. All gradients
/// are checked for finiteness before anything is modified; a NaN or inf raises
/// gradient_blowup and leaves the values untouched.
void sgd_step(std::span<Parameter* const> params, const SgdOptions& options);

struct GradCheckResult {
    double max_relative_error = 0.0;
    std::string worst_parameter;
    std::size_t worst_index = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
    std::size_t checked = 0;
};

/// Compares the gradients already stored in `params` against central
/// differences of `loss`. Relative error per scalar is
/// |a - n| / max(1e-8, |a| + |n|). `eps` must lie in [1e-6, 1e-3].
GradCheckResult grad_check(const std::function<double()>& loss,
                           std::span<Parameter* const> params, double eps);

}  // namespace seqtag
