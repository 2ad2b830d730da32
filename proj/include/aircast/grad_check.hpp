#pragma once

#include <cmath>
#include <cstddef>
#include <functional>

#include "aircast/errors.hpp"
#include "aircast/tensor.hpp"

namespace aircast::ad {

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::size_t worst_index = 0;
    double analytic_at_worst = 0.0;
    double numeric_at_worst = 0.0;
    double tolerance = 0.0;
    bool pass = true;
};

// Compares the tape gradient of a scalar-valued function against central
// finite differences (f(x+h*e) - f(x-h*e)) / (2h), coordinate by coordinate.
// Relative error uses max(|analytic|, |numeric|, 1e-8) as the denominator.
//
// `f` must build the computation under the given tape and return the scalar
// result; it is re-invoked for every perturbed evaluation.
inline GradCheckReport grad_check(
    const std::function<TensorPtr(Tape&, const TensorPtr&)>& f, const Tensor& x0, double h,
    double tol) {
    // analytic pass
    auto x = make_tensor(x0);
    x->requires_grad = true;
    Tape tape;
    auto loss = f(tape, x);
    if (loss->numel() != 1) throw std::invalid_argument("grad_check: f must be scalar-valued");
    if (!std::isfinite(loss->data[0])) throw numeric_error("grad_check: non-finite evaluation");
    tape.backward(loss);
    std::vector<double> analytic = x->has_grad() ? x->grad : std::vector<double>(x0.numel(), 0.0);

    auto eval = [&](const Tensor& point) {
        Tape t(/*recording=*/false);
        auto p = make_tensor(point);
        p->requires_grad = false;
        auto value = f(t, p);
        if (!std::isfinite(value->data[0])) throw numeric_error("grad_check: non-finite evaluation");
        return value->data[0];
    };

    GradCheckReport report;
    report.tolerance = tol;
    for (std::size_t i = 0; i < x0.numel(); ++i) {
        Tensor plus = x0, minus = x0;
        plus.data[i] += h;
        minus.data[i] -= h;
        const double numeric = (eval(plus) - eval(minus)) / (2.0 * h);
        const double denom = std::max({std::fabs(analytic[i]), std::fabs(numeric), 1e-8});
        const double rel = std::fabs(analytic[i] - numeric) / denom;
        if (rel >= report.max_rel_error) {
            report.max_rel_error = rel;
            report.worst_index = i;
            report.analytic_at_worst = analytic[i];
            report.numeric_at_worst = numeric;
        }
    }
    report.pass = report.max_rel_error < tol;
    return report;
}

}  // namespace aircast::ad
