// Copyright 2026 the checkerfree authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>

#include "ckfree/tensor.hpp"

namespace ckfree {

struct GradCheckReport {
    double max_rel_dev = 0.0;
    std::size_t worst_index = 0;
    bool pass = false;
    std::string note;
};

/// Compares an analytic gradient against central finite differences,
/// element by element. Deviation is |a - n| / max(1, |a|, |n|); the check
/// passes iff the maximum deviation is <= tol. Non-finite values anywhere
/// fail with a diagnostic note.
GradCheckReport grad_check(const std::function<double(const Tensor&)>& value_fn,
                           const Tensor& analytic_grad, const Tensor& x, double eps, double tol);

}  // namespace ckfree
