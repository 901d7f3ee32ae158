// Copyright 2026 the checkerfree authors
// SPDX-License-Identifier: Apache-2.0

#include "ckfree/gradcheck.hpp"

#include <cmath>

namespace ckfree {

GradCheckReport grad_check(const std::function<double(const Tensor&)>& value_fn,
                           const Tensor& analytic_grad, const Tensor& x, double eps, double tol) {
    GradCheckReport report;
    if (eps <= 0.0) {
        report.note = "eps must be positive";
        return report;
    }
    if (!analytic_grad.same_shape(x)) {
        report.note = "analytic gradient shape " + shape_to_string(analytic_grad.shape()) +
                      " does not match input shape " + shape_to_string(x.shape());
        return report;
    }
    if (!x.all_finite() || !analytic_grad.all_finite()) {
        report.note = "non-finite values in input or analytic gradient";
        return report;
    }
    Tensor probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = probe[i];
        probe[i] = saved + eps;
        const double fp = value_fn(probe);
        probe[i] = saved - eps;
        const double fm = value_fn(probe);
        probe[i] = saved;
        if (!std::isfinite(fp) || !std::isfinite(fm)) {
            report.note = "non-finite function value at index " + std::to_string(i);
            report.pass = false;
            return report;
        }
        const double numeric = (fp - fm) / (2.0 * eps);
        const double analytic = analytic_grad[i];
        const double denom = std::max({1.0, std::abs(numeric), std::abs(analytic)});
        const double dev = std::abs(numeric - analytic) / denom;
        if (dev > report.max_rel_dev) {
            report.max_rel_dev = dev;
            report.worst_index = i;
        }
    }
    report.pass = report.max_rel_dev <= tol;
    return report;
}

}  // namespace ckfree
