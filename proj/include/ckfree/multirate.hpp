// Copyright 2026 the checkerfree authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "ckfree/tensor.hpp"

namespace ckfree {

/// FIR filter coefficients indexed from lag 0 (taps[0] multiplies z^0).
/// 1-D filters have rows == 1; 2-D filters are row-major grids.
struct Filter {
    int rows = 1;
    int cols = 0;
    std::vector<double> taps;

    static Filter line(std::vector<double> t);
    static Filter grid(int rows, int cols, std::vector<double> t);

    bool one_dimensional() const { return rows == 1; }
    double at(int r, int c) const { return taps[static_cast<std::size_t>(r) * cols + c]; }
    double& at(int r, int c) { return taps[static_cast<std::size_t>(r) * cols + c]; }
    void validate() const;  // non-empty, finite
};

/// The U (1-D) or UxU (2-D) phase components of a filter under upsampling by
/// U, plus their DC values.
///
/// Indexing convention, 1-D: components[i-1] holds the taps of h at lags
/// congruent to U-i (mod U), in ascending lag order, so that
///   H(z) = sum_{i=1..U} components[i-1](z^U) * z^-(U-i).
/// Worked example: h = [1,2,3,4], U = 2 gives components [2,4] and [1,3].
/// All components share one length, ceil(len(h)/U), zero-padded at the tail.
///
/// 2-D: the row and column lags are decomposed independently; the component
/// for (row branch ir, column branch ic), each 1-based, sits at index
/// (ir-1)*U + (ic-1).
struct PolyphaseSet {
    int factor = 0;
    int dims = 1;
    std::vector<Filter> components;
    std::vector<double> dc;
};

struct AvoidanceReport {
    std::vector<double> phase_dc;
    double mean_dc = 0.0;
    double max_deviation = 0.0;
    double tol = 0.0;
    bool pass = false;
};

struct H0Factorization {
    bool exact = false;
    Filter quotient;       // valid only when exact
    double max_remainder = 0.0;
};

PolyphaseSet polyphase_decompose(const Filter& h, int factor);
// Exact inverse of polyphase_decompose up to trailing-zero trimming.
Filter polyphase_recompose(const PolyphaseSet& set);

/// Sum of all taps, i.e. the filter's response gain to a constant input.
double dc_value(const Filter& h);

/// Length-U all-ones kernel (UxU in 2-D). U = 1 is the identity.
Filter zero_order_hold_kernel(int factor, int dims);

/// True iff every phase component has the same DC value within tol. This is
/// the necessary and sufficient condition for an upsample-by-U interpolator
/// built from h to map constant inputs to constant outputs.
AvoidanceReport satisfies_avoidance_condition(const Filter& h, int factor, double tol);

/// Polynomial long division of h by the zero-order-hold kernel. Succeeds iff
/// the remainder is <= tol everywhere and the quotient reconstructs h within
/// tol; equal phase DC values and exact divisibility coincide in 1-D.
H0Factorization factor_out_h0(const Filter& h, int factor, double tol = 1e-9);

/// Full linear convolution of two tap grids. A 1-D filter participates as a
/// single-row grid; the result is 1-D iff both operands are.
Filter convolve(const Filter& a, const Filter& b);

// Reference interpolator forms for a 1-D signal: zero-insertion upsampling
// followed by convolution with h, and the equivalent per-phase filtering
// with interleave. The zero-insert form has length U*(N-1) + len(h); the
// polyphase form emits whole phase rows, length U*(N-1) + U*ceil(len(h)/U),
// whose extra tail entries are exact zeros. The common prefix is
// bit-identical.
std::vector<double> interpolate_zero_insert(const std::vector<double>& x, const Filter& h,
                                            int factor);
std::vector<double> interpolate_polyphase(const std::vector<double>& x, const PolyphaseSet& set);

}  // namespace ckfree
