// Copyright 2026 the checkerfree authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "ckfree/multirate.hpp"
#include "ckfree/tensor.hpp"

namespace ckfree {

enum class UpsamplerKind { deconv, subpixel, resize_conv };
enum class Correction { none, post_h0, inside_h0 };

const char* to_string(UpsamplerKind k);
const char* to_string(Correction c);

/// Static description of an upsampling layer: which structure, which
/// artifact correction, and its sizes. `kernel_size` is the deconvolution /
/// resize kernel size K3, or the per-phase kernel size for sub-pixel layers.
struct UpsamplerSpec {
    UpsamplerKind kind = UpsamplerKind::deconv;
    Correction correction = Correction::none;
    int factor = 0;
    int kernel_size = 0;
    int in_channels = 0;
    int dims = 2;

    // Enforces the structural rules: inside_h0 is a deconvolution-only
    // correction, and resize convolution takes no correction (it is already
    // free of artifacts).
    void validate() const;
};

/// Parameters of one upsampling layer. Layout by kind:
///  - deconv:      kernel (C,K) 1-D or (C,Kh,Kw) 2-D, one bias. With the
///                 inside_h0 correction the kernel stores the quotient P of
///                 spatial size K3-U+1; the effective kernel is P * H0.
///  - subpixel:    kernel (P,C,L) or (P,C,Lh,Lw) with P = U or U^2 phase
///                 maps, one bias per phase. Phase p covers output offset p
///                 (2-D: column p mod U, row p div U).
///  - resize_conv: kernel (1,C,K) or (1,C,Kh,Kw), one bias (a stride-1
///                 convolution applied after nearest-neighbor upsampling).
struct UpsamplerWeights {
    Tensor kernel;
    std::vector<double> bias;
};

struct UpsampleGrads {
    Tensor x;
    Tensor kernel;
    std::vector<double> bias;
};

// All forwards take (B,C,L) rank-3 or (B,C,H,W) rank-4 activations and
// produce a single output channel of U-times the spatial size.

/// Zero-insertion upsampling followed by convolution with the per-channel
/// kernels, summed over channels, plus the shared bias. Output is cropped to
/// exactly U x input size, anchored at phase 0.
Tensor deconv_forward_general(const Tensor& x, const UpsamplerWeights& w, int U);

/// Per-phase filtering followed by interleave. Must agree with the general
/// form bit-for-bit; the two paths share no code, so the tests exercise a
/// genuine equivalence.
Tensor deconv_forward_polyphase(const Tensor& x, const UpsamplerWeights& w, int U);

UpsampleGrads deconv_backward(const Tensor& x, const UpsamplerWeights& w, int U,
                              const Tensor& grad_out);

/// Stride-1 causal convolutions produce one intermediate map per phase;
/// the periodic shuffle interleaves them onto the fine grid.
Tensor subpixel_forward(const Tensor& x, const UpsamplerWeights& w, int U);
UpsampleGrads subpixel_backward(const Tensor& x, const UpsamplerWeights& w, int U,
                                const Tensor& grad_out);

/// Builds the sub-pixel weights that replicate a deconvolution layer: phase
/// kernels g_p[j] = h[U j + p] per axis, zero-padded to the common length
/// ceil(K/U), plus the shared bias copied to every phase.
UpsamplerWeights subpixel_kernels_from_deconv(const UpsamplerWeights& w, int U);

/// Each input sample is repeated U times per axis.
Tensor nearest_upsample(const Tensor& x, int U);
Tensor nearest_upsample_backward(const Tensor& grad_out, int U);

/// Nearest-neighbor upsampling followed by an ordinary same-padded
/// convolution with bias.
Tensor resize_conv_forward(const Tensor& x, const UpsamplerWeights& w, int U);
UpsampleGrads resize_conv_backward(const Tensor& x, const UpsamplerWeights& w, int U,
                                   const Tensor& grad_out);

/// Convolution with the (unnormalized) all-ones hold kernel, left/top
/// anchored with zero padding past the right/bottom edge, so output size
/// equals input size. Every interior sample sums exactly one full period:
/// period-U inputs come out constant away from the last U-1 samples.
Tensor h0_postfilter(const Tensor& y, int U);
Tensor h0_postfilter_backward(const Tensor& grad_out, int U);

/// The effective deconvolution kernels of the inside_h0 (learned-quotient)
/// correction: per-channel convolution of the stored P with the hold kernel.
Tensor approach_c_effective_kernel(const Tensor& p, int U);

/// Deconvolution with the effective kernels P * H0. Every effective kernel
/// satisfies the avoidance condition exactly by construction.
Tensor approach_c_deconv_forward(const Tensor& x, const UpsamplerWeights& pw, int U);
/// Returned kernel gradient is w.r.t. the stored P (the hold-kernel window
/// sum of the effective-kernel gradient).
UpsampleGrads approach_c_backward(const Tensor& x, const UpsamplerWeights& pw, int U,
                                  const Tensor& grad_out);

}  // namespace ckfree
