// Copyright 2026 the checkerfree authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ckfree/multirate.hpp"
#include "ckfree/tensor.hpp"

namespace testutil {

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline ckfree::Tensor random_tensor(std::mt19937_64& rng, std::vector<std::size_t> shape,
                                    double lo = -1.0, double hi = 1.0) {
    ckfree::Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = uniform(rng, lo, hi);
    return t;
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo = -1.0,
                                         double hi = 1.0) {
    std::vector<double> v(n);
    for (double& x : v) x = uniform(rng, lo, hi);
    return v;
}

inline ckfree::Filter random_line_filter(std::mt19937_64& rng, int len, double lo = -1.0,
                                         double hi = 1.0) {
    return ckfree::Filter::line(random_vector(rng, static_cast<std::size_t>(len), lo, hi));
}

inline ckfree::Filter random_grid_filter(std::mt19937_64& rng, int rows, int cols,
                                         double lo = -1.0, double hi = 1.0) {
    return ckfree::Filter::grid(rows, cols,
                                random_vector(rng, static_cast<std::size_t>(rows) * cols, lo, hi));
}

// Scalar probe loss: sum of the elementwise product with fixed random
// weights, so d(loss)/d(out) is exactly those weights.
inline double weighted_sum(const ckfree::Tensor& t, const ckfree::Tensor& weights) {
    double s = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) s += t[i] * weights[i];
    return s;
}

}  // namespace testutil
