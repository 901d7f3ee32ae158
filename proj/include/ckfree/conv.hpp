// Copyright 2026 the checkerfree authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "ckfree/tensor.hpp"

namespace ckfree {

/// Stride and per-side zero padding for a 2-D convolution. 1-D inputs are
/// handled as height-1 images.
struct ConvParams {
    int stride_y = 1;
    int stride_x = 1;
    int pad_top = 0;
    int pad_bottom = 0;
    int pad_left = 0;
    int pad_right = 0;

    // Stride-1 "same" padding; even kernels pad one more on the trailing side.
    static ConvParams same(int kh, int kw);
    static ConvParams same(int k) { return same(k, k); }
};

struct ConvGrads {
    Tensor x;
    Tensor w;
    Tensor b;  // rank-1, one entry per output channel
};

// Cross-correlation (no kernel flip) with per-output-channel bias.
// x: (B,C,H,W) or (B,C,L); w: (O,C,kh,kw) or (O,C,k); bias: size O or empty.
// Output spatial size = floor((in + pads - k) / stride) + 1 and must be >= 1.
Tensor conv_forward(const Tensor& x, const Tensor& w, const std::vector<double>& bias,
                    const ConvParams& p);

// Gradients of sum(grad_out * conv_forward(x, w, b, p)) w.r.t. x, w, b.
ConvGrads conv_backward(const Tensor& x, const Tensor& w, const ConvParams& p,
                        const Tensor& grad_out);

// BLAS worker count. Defaults to 1 for reproducible timings; the benchmark
// exposes this as an opt-in.
void set_blas_threads(int n);

}  // namespace ckfree
