// Copyright 2026 the checkerfree authors
// SPDX-License-Identifier: Apache-2.0

#include "ckfree/upsample.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>

#include "ckfree/conv.hpp"

namespace ckfree {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw ShapeError(msg);
}

void require_arg(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

int ceil_div(int a, int b) { return (a + b - 1) / b; }

// The layer code is written once for rank-4 activations (B,C,H,W) with an
// independent factor per axis; 1-D inputs run through it as (B,C,1,L) with
// uy = 1. The wrappers below do the reshaping.

Tensor act_to4(const Tensor& x) {
    require(x.rank() == 3 || x.rank() == 4, "upsample: activations must be rank 3 or 4");
    if (x.rank() == 4) return x;
    return x.reshaped({x.shape()[0], x.shape()[1], 1, x.shape()[2]});
}

Tensor act_from4(const Tensor& y, bool was_1d) {
    if (!was_1d) return y;
    return y.reshaped({y.shape()[0], y.shape()[1], y.shape()[3]});
}

// ---------------------------------------------------------------------------
// Deconvolution, general (scatter) form.
// ---------------------------------------------------------------------------

Tensor deconv_general_impl(const Tensor& x, const Tensor& k, double bias, int uy, int ux) {
    const int B = static_cast<int>(x.shape()[0]);
    const int C = static_cast<int>(x.shape()[1]);
    const int H = static_cast<int>(x.shape()[2]);
    const int W = static_cast<int>(x.shape()[3]);
    require(k.rank() == 3 && static_cast<int>(k.shape()[0]) == C,
            "deconv: kernel must have one plane per input channel");
    const int kh = static_cast<int>(k.shape()[1]);
    const int kw = static_cast<int>(k.shape()[2]);
    const int OH = uy * H;
    const int OW = ux * W;

    Tensor out = Tensor::zeros({static_cast<std::size_t>(B), 1, static_cast<std::size_t>(OH),
                                static_cast<std::size_t>(OW)});
    // Zero-insertion then convolution, written as a scatter: every input
    // sample stamps a copy of its channel kernel into the output. Positions
    // past the U x size crop are simply dropped.
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c)
            for (int my = 0; my < H; ++my)
                for (int mx = 0; mx < W; ++mx) {
                    const double v = x.at4(b, c, my, mx);
                    for (int ky = 0; ky < kh; ++ky) {
                        const int oy = uy * my + ky;
                        if (oy >= OH) continue;
                        for (int kx = 0; kx < kw; ++kx) {
                            const int ox = ux * mx + kx;
                            if (ox >= OW) continue;
                            out.at4(b, 0, oy, ox) += v * k.at3(c, ky, kx);
                        }
                    }
                }
    for (double& v : out.vec()) v += bias;
    return out;
}

// Phase kernels of a deconvolution kernel: g[n][c][jy][jx] = k[c][uy*jy+py][ux*jx+px]
// with n = py*ux + px, zero-padded to the common size ceil(kh/uy) x ceil(kw/ux).
Tensor phase_kernels(const Tensor& k, int uy, int ux) {
    const int C = static_cast<int>(k.shape()[0]);
    const int kh = static_cast<int>(k.shape()[1]);
    const int kw = static_cast<int>(k.shape()[2]);
    const int Ly = ceil_div(kh, uy);
    const int Lx = ceil_div(kw, ux);
    Tensor g = Tensor::zeros({static_cast<std::size_t>(uy) * ux, static_cast<std::size_t>(C),
                              static_cast<std::size_t>(Ly), static_cast<std::size_t>(Lx)});
    for (int py = 0; py < uy; ++py)
        for (int px = 0; px < ux; ++px)
            for (int c = 0; c < C; ++c)
                for (int jy = 0; jy < Ly; ++jy)
                    for (int jx = 0; jx < Lx; ++jx) {
                        const int ky = uy * jy + py;
                        const int kx = ux * jx + px;
                        if (ky < kh && kx < kw)
                            g.at4(py * ux + px, c, jy, jx) = k.at3(c, ky, kx);
                    }
    return g;
}

// Deconvolution, polyphase form: filter the input with every phase kernel,
// then interleave the branch outputs onto the fine grid.
Tensor deconv_polyphase_impl(const Tensor& x, const Tensor& k, double bias, int uy, int ux) {
    const int B = static_cast<int>(x.shape()[0]);
    const int C = static_cast<int>(x.shape()[1]);
    const int H = static_cast<int>(x.shape()[2]);
    const int W = static_cast<int>(x.shape()[3]);
    require(k.rank() == 3 && static_cast<int>(k.shape()[0]) == C,
            "deconv: kernel must have one plane per input channel");
    const Tensor g = phase_kernels(k, uy, ux);
    const int Ly = static_cast<int>(g.shape()[2]);
    const int Lx = static_cast<int>(g.shape()[3]);

    Tensor out = Tensor::zeros({static_cast<std::size_t>(B), 1,
                                static_cast<std::size_t>(uy) * H,
                                static_cast<std::size_t>(ux) * W});
    for (int b = 0; b < B; ++b)
        for (int py = 0; py < uy; ++py)
            for (int px = 0; px < ux; ++px) {
                const int n = py * ux + px;
                for (int qy = 0; qy < H; ++qy)
                    for (int qx = 0; qx < W; ++qx) {
                        double acc = 0.0;
                        // Taps are walked high-to-low so input samples are
                        // visited in ascending order, the same order in which
                        // the scatter form touches them; the two forms then
                        // agree bit-for-bit, not just to rounding.
                        for (int c = 0; c < C; ++c)
                            for (int jy = Ly - 1; jy >= 0; --jy) {
                                const int my = qy - jy;
                                if (my < 0) continue;
                                for (int jx = Lx - 1; jx >= 0; --jx) {
                                    const int mx = qx - jx;
                                    if (mx < 0) continue;
                                    acc += g.at4(n, c, jy, jx) * x.at4(b, c, my, mx);
                                }
                            }
                        out.at4(b, 0, uy * qy + py, ux * qx + px) = acc + bias;
                    }
            }
    return out;
}

struct DeconvGradsImpl {
    Tensor x;
    Tensor kernel;
    double bias;
};

DeconvGradsImpl deconv_backward_impl(const Tensor& x, const Tensor& k, int uy, int ux,
                                     const Tensor& go) {
    const int B = static_cast<int>(x.shape()[0]);
    const int C = static_cast<int>(x.shape()[1]);
    const int H = static_cast<int>(x.shape()[2]);
    const int W = static_cast<int>(x.shape()[3]);
    const int kh = static_cast<int>(k.shape()[1]);
    const int kw = static_cast<int>(k.shape()[2]);
    const int OH = uy * H;
    const int OW = ux * W;
    require(go.rank() == 4 && static_cast<int>(go.shape()[0]) == B && go.shape()[1] == 1 &&
                static_cast<int>(go.shape()[2]) == OH && static_cast<int>(go.shape()[3]) == OW,
            "deconv backward: grad_out shape mismatch");

    DeconvGradsImpl gr{Tensor::zeros(x.shape()), Tensor::zeros(k.shape()), 0.0};
    for (const double v : go.vec()) gr.bias += v;
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c)
            for (int my = 0; my < H; ++my)
                for (int mx = 0; mx < W; ++mx) {
                    const double xv = x.at4(b, c, my, mx);
                    double gx = 0.0;
                    for (int ky = 0; ky < kh; ++ky) {
                        const int oy = uy * my + ky;
                        if (oy >= OH) continue;
                        for (int kx = 0; kx < kw; ++kx) {
                            const int ox = ux * mx + kx;
                            if (ox >= OW) continue;
                            const double g = go.at4(b, 0, oy, ox);
                            gx += k.at3(c, ky, kx) * g;
                            gr.kernel.at3(c, ky, kx) += xv * g;
                        }
                    }
                    gr.x.at4(b, c, my, mx) = gx;
                }
    return gr;
}

// ---------------------------------------------------------------------------
// Sub-pixel convolution.
// ---------------------------------------------------------------------------

Tensor subpixel_impl(const Tensor& x, const Tensor& k, const std::vector<double>& bias, int uy,
                     int ux) {
    const int B = static_cast<int>(x.shape()[0]);
    const int C = static_cast<int>(x.shape()[1]);
    const int H = static_cast<int>(x.shape()[2]);
    const int W = static_cast<int>(x.shape()[3]);
    const int P = uy * ux;
    require(k.rank() == 4 && static_cast<int>(k.shape()[0]) == P &&
                static_cast<int>(k.shape()[1]) == C,
            "subpixel: kernel must be (phases, channels, kh, kw) with phases = factor count");
    require(static_cast<int>(bias.size()) == P, "subpixel: one bias per phase required");
    const int Lh = static_cast<int>(k.shape()[2]);
    const int Lw = static_cast<int>(k.shape()[3]);

    Tensor out = Tensor::zeros({static_cast<std::size_t>(B), 1,
                                static_cast<std::size_t>(uy) * H,
                                static_cast<std::size_t>(ux) * W});
    for (int b = 0; b < B; ++b)
        for (int n = 0; n < P; ++n) {
            // Phase n lands on offset (row n div ux, column n mod ux).
            const int py = n / ux;
            const int px = n % ux;
            for (int qy = 0; qy < H; ++qy)
                for (int qx = 0; qx < W; ++qx) {
                    double acc = 0.0;
                    // Causal stride-1 convolution: tap j looks back j input
                    // samples; samples left of the edge are zero padding.
                    for (int c = 0; c < C; ++c)
                        for (int jy = Lh - 1; jy >= 0; --jy) {
                            const int my = qy - jy;
                            if (my < 0) continue;
                            for (int jx = Lw - 1; jx >= 0; --jx) {
                                const int mx = qx - jx;
                                if (mx < 0) continue;
                                acc += k.at4(n, c, jy, jx) * x.at4(b, c, my, mx);
                            }
                        }
                    out.at4(b, 0, uy * qy + py, ux * qx + px) = acc + bias[n];
                }
        }
    return out;
}

UpsampleGrads subpixel_backward_impl(const Tensor& x, const Tensor& k,
                                     const std::vector<double>& bias, int uy, int ux,
                                     const Tensor& go) {
    const int B = static_cast<int>(x.shape()[0]);
    const int C = static_cast<int>(x.shape()[1]);
    const int H = static_cast<int>(x.shape()[2]);
    const int W = static_cast<int>(x.shape()[3]);
    const int P = uy * ux;
    require(static_cast<int>(k.shape()[0]) == P && static_cast<int>(k.shape()[1]) == C,
            "subpixel backward: kernel shape mismatch");
    require(static_cast<int>(bias.size()) == P, "subpixel: one bias per phase required");
    const int Lh = static_cast<int>(k.shape()[2]);
    const int Lw = static_cast<int>(k.shape()[3]);
    require(go.rank() == 4 && static_cast<int>(go.shape()[2]) == uy * H &&
                static_cast<int>(go.shape()[3]) == ux * W,
            "subpixel backward: grad_out shape mismatch");

    UpsampleGrads gr{Tensor::zeros(x.shape()), Tensor::zeros(k.shape()),
                     std::vector<double>(bias.size(), 0.0)};
    for (int b = 0; b < B; ++b)
        for (int n = 0; n < P; ++n) {
            const int py = n / ux;
            const int px = n % ux;
            for (int qy = 0; qy < H; ++qy)
                for (int qx = 0; qx < W; ++qx) {
                    const double g = go.at4(b, 0, uy * qy + py, ux * qx + px);
                    gr.bias[n] += g;
                    for (int c = 0; c < C; ++c)
                        for (int jy = 0; jy < Lh; ++jy) {
                            const int my = qy - jy;
                            if (my < 0) continue;
                            for (int jx = 0; jx < Lw; ++jx) {
                                const int mx = qx - jx;
                                if (mx < 0) continue;
                                gr.kernel.at4(n, c, jy, jx) += g * x.at4(b, c, my, mx);
                                gr.x.at4(b, c, my, mx) += k.at4(n, c, jy, jx) * g;
                            }
                        }
                }
        }
    return gr;
}

// ---------------------------------------------------------------------------
// Hold-kernel window sums (forward filter and its transpose).
// ---------------------------------------------------------------------------

Tensor h0_impl(const Tensor& y, int uy, int ux) {
    const int B = static_cast<int>(y.shape()[0]);
    const int C = static_cast<int>(y.shape()[1]);
    const int H = static_cast<int>(y.shape()[2]);
    const int W = static_cast<int>(y.shape()[3]);
    Tensor out = Tensor::zeros(y.shape());
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c)
            for (int oy = 0; oy < H; ++oy)
                for (int ox = 0; ox < W; ++ox) {
                    double acc = 0.0;
                    for (int ky = 0; ky < uy && oy + ky < H; ++ky)
                        for (int kx = 0; kx < ux && ox + kx < W; ++kx)
                            acc += y.at4(b, c, oy + ky, ox + kx);
                    out.at4(b, c, oy, ox) = acc;
                }
    return out;
}

Tensor h0_backward_impl(const Tensor& go, int uy, int ux) {
    const int B = static_cast<int>(go.shape()[0]);
    const int C = static_cast<int>(go.shape()[1]);
    const int H = static_cast<int>(go.shape()[2]);
    const int W = static_cast<int>(go.shape()[3]);
    Tensor gx = Tensor::zeros(go.shape());
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c)
            for (int my = 0; my < H; ++my)
                for (int mx = 0; mx < W; ++mx) {
                    double acc = 0.0;
                    for (int ky = 0; ky < uy && ky <= my; ++ky)
                        for (int kx = 0; kx < ux && kx <= mx; ++kx)
                            acc += go.at4(b, c, my - ky, mx - kx);
                    gx.at4(b, c, my, mx) = acc;
                }
    return gx;
}

int factor_y(const Tensor& x, int U) { return x.rank() == 3 ? 1 : U; }

void check_deconv_weights(const Tensor& x, const UpsamplerWeights& w) {
    require(w.bias.size() == 1, "deconv: exactly one shared bias required");
    if (x.rank() == 3)
        require(w.kernel.rank() == 2, "deconv: 1-D activations need a (C,K) kernel");
    else
        require(w.kernel.rank() == 3, "deconv: 2-D activations need a (C,Kh,Kw) kernel");
}

Tensor deconv_kernel3(const Tensor& k) {
    if (k.rank() == 3) return k;
    return k.reshaped({k.shape()[0], 1, k.shape()[1]});
}

}  // namespace

const char* to_string(UpsamplerKind k) {
    switch (k) {
        case UpsamplerKind::deconv: return "deconv";
        case UpsamplerKind::subpixel: return "subpixel";
        case UpsamplerKind::resize_conv: return "resize_conv";
    }
    return "?";
}

const char* to_string(Correction c) {
    switch (c) {
        case Correction::none: return "none";
        case Correction::post_h0: return "post_h0";
        case Correction::inside_h0: return "inside_h0";
    }
    return "?";
}

void UpsamplerSpec::validate() const {
    require_arg(factor >= 1, "upsampler: factor must be >= 1");
    require_arg(kernel_size >= 1, "upsampler: kernel size must be >= 1");
    require_arg(in_channels >= 1, "upsampler: in_channels must be >= 1");
    require_arg(dims == 1 || dims == 2, "upsampler: dims must be 1 or 2");
    if (correction == Correction::inside_h0)
        require_arg(kind == UpsamplerKind::deconv,
                    "inside_h0 correction is applicable to only deconvolution layers");
    if (kind == UpsamplerKind::resize_conv)
        require_arg(correction == Correction::none,
                    "resize_conv takes no correction (it is artifact-free by construction)");
    if (correction == Correction::inside_h0)
        require_arg(kernel_size >= factor,
                    "inside_h0: effective kernel size K3 must be >= factor");
}

Tensor deconv_forward_general(const Tensor& x, const UpsamplerWeights& w, int U) {
    require_arg(U >= 1, "deconv: factor must be >= 1");
    check_deconv_weights(x, w);
    const bool was_1d = x.rank() == 3;
    Tensor out = deconv_general_impl(act_to4(x), deconv_kernel3(w.kernel), w.bias[0],
                                     was_1d ? 1 : U, U);
    return act_from4(out, was_1d);
}

Tensor deconv_forward_polyphase(const Tensor& x, const UpsamplerWeights& w, int U) {
    require_arg(U >= 1, "deconv: factor must be >= 1");
    check_deconv_weights(x, w);
    const bool was_1d = x.rank() == 3;
    Tensor out = deconv_polyphase_impl(act_to4(x), deconv_kernel3(w.kernel), w.bias[0],
                                       was_1d ? 1 : U, U);
    return act_from4(out, was_1d);
}

UpsampleGrads deconv_backward(const Tensor& x, const UpsamplerWeights& w, int U,
                              const Tensor& grad_out) {
    require_arg(U >= 1, "deconv: factor must be >= 1");
    check_deconv_weights(x, w);
    const bool was_1d = x.rank() == 3;
    DeconvGradsImpl gi = deconv_backward_impl(act_to4(x), deconv_kernel3(w.kernel),
                                              factor_y(x, U), U, act_to4(grad_out));
    UpsampleGrads gr;
    gr.x = act_from4(gi.x, was_1d);
    gr.kernel = was_1d ? gi.kernel.reshaped(w.kernel.shape()) : gi.kernel;
    gr.bias = {gi.bias};
    return gr;
}

Tensor subpixel_forward(const Tensor& x, const UpsamplerWeights& w, int U) {
    require_arg(U >= 1, "subpixel: factor must be >= 1");
    const bool was_1d = x.rank() == 3;
    Tensor k = w.kernel;
    if (was_1d) {
        require(k.rank() == 3, "subpixel: 1-D activations need a (P,C,K) kernel");
        k = k.reshaped({k.shape()[0], k.shape()[1], 1, k.shape()[2]});
    } else {
        require(k.rank() == 4, "subpixel: 2-D activations need a (P,C,Kh,Kw) kernel");
    }
    Tensor out = subpixel_impl(act_to4(x), k, w.bias, was_1d ? 1 : U, U);
    return act_from4(out, was_1d);
}

UpsampleGrads subpixel_backward(const Tensor& x, const UpsamplerWeights& w, int U,
                                const Tensor& grad_out) {
    require_arg(U >= 1, "subpixel: factor must be >= 1");
    const bool was_1d = x.rank() == 3;
    Tensor k = w.kernel;
    if (was_1d) {
        require(k.rank() == 3, "subpixel: 1-D activations need a (P,C,K) kernel");
        k = k.reshaped({k.shape()[0], k.shape()[1], 1, k.shape()[2]});
    } else {
        require(k.rank() == 4, "subpixel: 2-D activations need a (P,C,Kh,Kw) kernel");
    }
    UpsampleGrads gr = subpixel_backward_impl(act_to4(x), k, w.bias, was_1d ? 1 : U,
                                              U, act_to4(grad_out));
    gr.x = act_from4(gr.x, was_1d);
    if (was_1d) gr.kernel = gr.kernel.reshaped(w.kernel.shape());
    return gr;
}

UpsamplerWeights subpixel_kernels_from_deconv(const UpsamplerWeights& w, int U) {
    require_arg(U >= 1, "subpixel_kernels_from_deconv: factor must be >= 1");
    require(w.bias.size() == 1, "subpixel_kernels_from_deconv: deconv weights carry one bias");
    require(w.kernel.rank() == 2 || w.kernel.rank() == 3,
            "subpixel_kernels_from_deconv: deconv kernel must be (C,K) or (C,Kh,Kw)");
    const bool was_1d = w.kernel.rank() == 2;
    Tensor g = phase_kernels(deconv_kernel3(w.kernel), was_1d ? 1 : U, U);
    UpsamplerWeights out;
    out.kernel = was_1d ? g.reshaped({g.shape()[0], g.shape()[1], g.shape()[3]}) : g;
    out.bias.assign(g.shape()[0], w.bias[0]);
    return out;
}

Tensor nearest_upsample(const Tensor& x, int U) {
    require_arg(U >= 1, "nearest_upsample: factor must be >= 1");
    const bool was_1d = x.rank() == 3;
    const Tensor x4 = act_to4(x);
    const int uy = was_1d ? 1 : U;
    const std::size_t B = x4.shape()[0], C = x4.shape()[1], H = x4.shape()[2], W = x4.shape()[3];
    Tensor out = Tensor::zeros({B, C, H * uy, W * U});
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t oy = 0; oy < H * uy; ++oy)
                for (std::size_t ox = 0; ox < W * U; ++ox)
                    out.at4(b, c, oy, ox) = x4.at4(b, c, oy / uy, ox / U);
    return act_from4(out, was_1d);
}

Tensor nearest_upsample_backward(const Tensor& grad_out, int U) {
    require_arg(U >= 1, "nearest_upsample: factor must be >= 1");
    const bool was_1d = grad_out.rank() == 3;
    const Tensor go = act_to4(grad_out);
    const int uy = was_1d ? 1 : U;
    const std::size_t B = go.shape()[0], C = go.shape()[1];
    const std::size_t H = go.shape()[2] / uy, W = go.shape()[3] / U;
    require(H * uy == go.shape()[2] && W * U == go.shape()[3],
            "nearest_upsample backward: grad_out size not a multiple of the factor");
    Tensor gx = Tensor::zeros({B, C, H, W});
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t oy = 0; oy < H * uy; ++oy)
                for (std::size_t ox = 0; ox < W * U; ++ox)
                    gx.at4(b, c, oy / uy, ox / U) += go.at4(b, c, oy, ox);
    return act_from4(gx, was_1d);
}

Tensor resize_conv_forward(const Tensor& x, const UpsamplerWeights& w, int U) {
    require_arg(U >= 1, "resize_conv: factor must be >= 1");
    require(w.kernel.rank() == x.rank() && w.kernel.shape()[0] == 1,
            "resize_conv: kernel must be a single-output conv kernel matching input rank");
    Tensor up = nearest_upsample(x, U);
    const int kh = x.rank() == 3 ? 1 : static_cast<int>(w.kernel.shape()[2]);
    const int kw = static_cast<int>(w.kernel.shape()[w.kernel.rank() - 1]);
    return conv_forward(up, w.kernel, w.bias, ConvParams::same(kh, kw));
}

UpsampleGrads resize_conv_backward(const Tensor& x, const UpsamplerWeights& w, int U,
                                   const Tensor& grad_out) {
    require_arg(U >= 1, "resize_conv: factor must be >= 1");
    Tensor up = nearest_upsample(x, U);
    const int kh = x.rank() == 3 ? 1 : static_cast<int>(w.kernel.shape()[2]);
    const int kw = static_cast<int>(w.kernel.shape()[w.kernel.rank() - 1]);
    ConvGrads cg = conv_backward(up, w.kernel, ConvParams::same(kh, kw), grad_out);
    UpsampleGrads gr;
    gr.x = nearest_upsample_backward(cg.x, U);
    gr.kernel = cg.w;
    gr.bias.assign(cg.b.vec().begin(), cg.b.vec().end());
    return gr;
}

Tensor h0_postfilter(const Tensor& y, int U) {
    require_arg(U >= 1, "h0_postfilter: factor must be >= 1");
    const bool was_1d = y.rank() == 3;
    return act_from4(h0_impl(act_to4(y), was_1d ? 1 : U, U), was_1d);
}

Tensor h0_postfilter_backward(const Tensor& grad_out, int U) {
    require_arg(U >= 1, "h0_postfilter: factor must be >= 1");
    const bool was_1d = grad_out.rank() == 3;
    return act_from4(h0_backward_impl(act_to4(grad_out), was_1d ? 1 : U, U), was_1d);
}

Tensor approach_c_effective_kernel(const Tensor& p, int U) {
    require_arg(U >= 1, "approach_c: factor must be >= 1");
    require(p.rank() == 2 || p.rank() == 3, "approach_c: P must be (C,K) or (C,Kh,Kw)");
    const bool was_1d = p.rank() == 2;
    const Tensor p3 = deconv_kernel3(p);
    const int C = static_cast<int>(p3.shape()[0]);
    const int ph = static_cast<int>(p3.shape()[1]);
    const int pw = static_cast<int>(p3.shape()[2]);
    const int uy = was_1d ? 1 : U;
    const int kh = ph + uy - 1;
    const int kw = pw + U - 1;
    Tensor h = Tensor::zeros({static_cast<std::size_t>(C), static_cast<std::size_t>(kh),
                              static_cast<std::size_t>(kw)});
    // Effective kernel H = P convolved with the all-ones hold kernel.
    for (int c = 0; c < C; ++c)
        for (int a = 0; a < ph; ++a)
            for (int bb = 0; bb < pw; ++bb) {
                const double v = p3.at3(c, a, bb);
                for (int ky = 0; ky < uy; ++ky)
                    for (int kx = 0; kx < U; ++kx) h.at3(c, a + ky, bb + kx) += v;
            }
    if (was_1d) return h.reshaped({h.shape()[0], h.shape()[2]});
    return h;
}

Tensor approach_c_deconv_forward(const Tensor& x, const UpsamplerWeights& pw, int U) {
    UpsamplerWeights eff;
    eff.kernel = approach_c_effective_kernel(pw.kernel, U);
    eff.bias = pw.bias;
    return deconv_forward_general(x, eff, U);
}

UpsampleGrads approach_c_backward(const Tensor& x, const UpsamplerWeights& pw, int U,
                                  const Tensor& grad_out) {
    UpsamplerWeights eff;
    eff.kernel = approach_c_effective_kernel(pw.kernel, U);
    eff.bias = pw.bias;
    UpsampleGrads ge = deconv_backward(x, eff, U, grad_out);

    // Chain rule through H = P * H0: the gradient w.r.t. P is the hold-kernel
    // window sum (correlation with H0) of the gradient w.r.t. H.
    const bool was_1d = pw.kernel.rank() == 2;
    const Tensor gh = deconv_kernel3(ge.kernel);
    const Tensor p3 = deconv_kernel3(pw.kernel);
    const int C = static_cast<int>(p3.shape()[0]);
    const int ph = static_cast<int>(p3.shape()[1]);
    const int pwd = static_cast<int>(p3.shape()[2]);
    const int uy = was_1d ? 1 : U;
    Tensor gp = Tensor::zeros(p3.shape());
    for (int c = 0; c < C; ++c)
        for (int a = 0; a < ph; ++a)
            for (int bb = 0; bb < pwd; ++bb) {
                double acc = 0.0;
                for (int ky = 0; ky < uy; ++ky)
                    for (int kx = 0; kx < U; ++kx) acc += gh.at3(c, a + ky, bb + kx);
                gp.at3(c, a, bb) = acc;
            }
    UpsampleGrads gr;
    gr.x = ge.x;
    gr.kernel = was_1d ? gp.reshaped(pw.kernel.shape()) : gp;
    gr.bias = ge.bias;
    return gr;
}

}  // namespace ckfree
