#include "seqtag/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "seqtag/error.hpp"

namespace seqtag {

double logistic(double x) noexcept {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double identity(double x) noexcept { return x; }

void softmax_into(std::span<const double> logits, std::span<double> out) {
    require_size(out, logits.size(), "softmax out");
    if (logits.empty()) return;
    const double top = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - top);
        total += out[i];
    }
    for (double& v : out) v /= total;
}

Vector softmax(std::span<const double> logits) {
    Vector out(logits.size());
    softmax_into(logits, out);
    return out;
}

void uniform_fill(Matrix& m, double lo, double hi, Rng& rng) {
    if (!(lo < hi)) throw Error(ErrorCode::invalid_argument, "uniform_init: require lo < hi");
    for (double& v : m.values()) v = rng.uniform(lo, hi);
}

Matrix uniform_init(std::size_t rows, std::size_t cols, double lo, double hi, Rng& rng) {
    Matrix m(rows, cols);
    uniform_fill(m, lo, hi, rng);
    return m;
}

Parameter::Parameter(std::string n, std::size_t rows, std::size_t cols, bool sparse)
    : name(std::move(n)), value(rows, cols), grad(rows, cols), row_sparse(sparse) {}

void Parameter::mark_row(std::size_t r) {
    if (!row_sparse) return;
    if (std::find(touched_rows.begin(), touched_rows.end(), r) == touched_rows.end())
        touched_rows.push_back(r);
}

void Parameter::zero_grad() {
    if (row_sparse) {
        for (std::size_t r : touched_rows) {
            auto g = grad.row(r);
            std::fill(g.begin(), g.end(), 0.0);
        }
        touched_rows.clear();
    } else {
        grad.fill(0.0);
    }
}

namespace {

template <typename Fn>
void for_each_grad_row(Parameter& p, Fn&& fn) {
    if (p.row_sparse) {
        for (std::size_t r : p.touched_rows) fn(p.value.row(r), p.grad.row(r));
    } else {
        fn(p.value.values(), p.grad.values());
    }
}

}  // namespace

void sgd_step(std::span<Parameter* const> params, const SgdOptions& options) {
    if (!(options.learning_rate >= 0.0) || !std::isfinite(options.learning_rate))
        throw Error(ErrorCode::invalid_argument, "sgd_step: learning rate must be finite and >= 0");
    for (Parameter* p : params) {
        for_each_grad_row(*p, [&](std::span<double>, std::span<double> g) {
            for (double v : g) {
                if (!std::isfinite(v))
                    throw Error(ErrorCode::gradient_blowup,
                                "gradient blowup in parameter " + p->name);
            }
        });
    }
    const double lr = options.learning_rate;
    const double clip = options.clip;
    for (Parameter* p : params) {
        for_each_grad_row(*p, [&](std::span<double> v, std::span<double> g) {
            for (std::size_t i = 0; i < v.size(); ++i) {
                double gi = g[i];
                if (clip > 0.0) gi = std::clamp(gi, -clip, clip);
                v[i] -= lr * gi;
            }
        });
        p->zero_grad();
    }
}

GradCheckResult grad_check(const std::function<double()>& loss,
                           std::span<Parameter* const> params, double eps) {
    if (!(eps >= 1e-6 && eps <= 1e-3))
        throw Error(ErrorCode::invalid_argument, "grad_check: eps must lie in [1e-6, 1e-3]");
    GradCheckResult result;
    for (Parameter* p : params) {
        auto values = p->value.values();
        auto grads = p->grad.values();
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double saved = values[i];
            values[i] = saved + eps;
            const double plus = loss();
            values[i] = saved - eps;
            const double minus = loss();
            values[i] = saved;

            const double numeric = (plus - minus) / (2.0 * eps);
            const double analytic = grads[i];
            const double rel = std::abs(analytic - numeric) /
                               std::max(1e-8, std::abs(analytic) + std::abs(numeric));
            ++result.checked;
            if (rel > result.max_relative_error || std::isnan(rel)) {
                result.max_relative_error = std::isnan(rel) ? std::numeric_limits<double>::infinity() : rel;
                result.worst_parameter = p->name;
                result.worst_index = i;
                result.worst_analytic = analytic;
                result.worst_numeric = numeric;
            }
        }
    }
    return result;
}

}  // namespace seqtag
