// Copyright 2026 the checkerfree authors
// SPDX-License-Identifier: Apache-2.0

#include "ckfree/conv.hpp"

#include <cblas.h>

#include <algorithm>
#include <string>
#include <vector>

extern "C" void openblas_set_num_threads(int);

namespace ckfree {

namespace {

// Timings must be reproducible and deterministic, so BLAS stays single-threaded.
void pin_blas_threads() {
    static const bool done = [] {
        openblas_set_num_threads(1);
        return true;
    }();
    (void)done;
}

}  // namespace

void set_blas_threads(int n) {
    if (n < 1) throw std::invalid_argument("set_blas_threads: thread count must be >= 1");
    pin_blas_threads();  // burn the one-time default before overriding it
    openblas_set_num_threads(n);
}

namespace {

struct ConvShapes {
    bool was_1d = false;
    std::size_t batch, in_ch, in_h, in_w;
    std::size_t out_ch, kh, kw;
    std::size_t out_h, out_w;
};

ConvShapes resolve_shapes(const Tensor& x, const Tensor& w, const ConvParams& p) {
    ConvShapes s;
    if (x.rank() == 3 && w.rank() == 3) {
        s.was_1d = true;
    } else if (x.rank() != 4 || w.rank() != 4) {
        throw ShapeError("conv expects rank-4 (B,C,H,W) with rank-4 kernel or rank-3 with "
                         "rank-3 kernel; got input " + shape_to_string(x.shape()) +
                         ", kernel " + shape_to_string(w.shape()));
    }
    s.batch = x.dim(0);
    s.in_ch = x.dim(1);
    s.in_h = s.was_1d ? 1 : x.dim(2);
    s.in_w = s.was_1d ? x.dim(2) : x.dim(3);
    s.out_ch = w.dim(0);
    s.kh = s.was_1d ? 1 : w.dim(2);
    s.kw = s.was_1d ? w.dim(2) : w.dim(3);
    if (w.dim(1) != s.in_ch) {
        throw ShapeError("conv channel axis mismatch: input axis 1 has size " +
                         std::to_string(s.in_ch) + " but kernel axis 1 has size " +
                         std::to_string(w.dim(1)));
    }
    const long padded_h = static_cast<long>(s.in_h) + p.pad_top + p.pad_bottom;
    const long padded_w = static_cast<long>(s.in_w) + p.pad_left + p.pad_right;
    const long oh = (padded_h - static_cast<long>(s.kh)) / p.stride_y + 1;
    const long ow = (padded_w - static_cast<long>(s.kw)) / p.stride_x + 1;
    if (padded_h < static_cast<long>(s.kh) || padded_w < static_cast<long>(s.kw) || oh < 1 ||
        ow < 1) {
        throw ShapeError("conv kernel " + shape_to_string(w.shape()) +
                         " does not fit padded input " + shape_to_string(x.shape()));
    }
    s.out_h = static_cast<std::size_t>(oh);
    s.out_w = static_cast<std::size_t>(ow);
    return s;
}

// Output rows are processed in bands so the unfolded-patch buffer stays
// bounded even for large images (resize convolution runs the conv stack at
// the fine rate, where a full im2col matrix can reach gigabytes).
constexpr std::size_t kColsBudgetDoubles = 8u << 20;  // 64 MB of doubles

std::size_t band_rows_for(const ConvShapes& s) {
    const std::size_t kdim = s.in_ch * s.kh * s.kw;
    const std::size_t rows = kColsBudgetDoubles / (kdim * s.out_w + 1);
    return std::max<std::size_t>(1, std::min(rows, s.out_h));
}

// cols is (C*kh*kw) x (band_h*out_w), row-major, covering output rows
// [oy0, oy0+band_h).
void im2col(const double* x, const ConvShapes& s, const ConvParams& p, std::size_t oy0,
            std::size_t band_h, double* cols) {
    const std::size_t ncols = band_h * s.out_w;
    for (std::size_t c = 0; c < s.in_ch; ++c) {
        for (std::size_t ky = 0; ky < s.kh; ++ky) {
            for (std::size_t kx = 0; kx < s.kw; ++kx) {
                double* row = cols + ((c * s.kh + ky) * s.kw + kx) * ncols;
                for (std::size_t oy = 0; oy < band_h; ++oy) {
                    const long iy = static_cast<long>(oy0 + oy) * p.stride_y - p.pad_top +
                                    static_cast<long>(ky);
                    const bool y_ok = iy >= 0 && iy < static_cast<long>(s.in_h);
                    for (std::size_t ox = 0; ox < s.out_w; ++ox) {
                        const long ix = static_cast<long>(ox) * p.stride_x - p.pad_left +
                                        static_cast<long>(kx);
                        row[oy * s.out_w + ox] =
                            (y_ok && ix >= 0 && ix < static_cast<long>(s.in_w))
                                ? x[(c * s.in_h + static_cast<std::size_t>(iy)) * s.in_w +
                                    static_cast<std::size_t>(ix)]
                                : 0.0;
                    }
                }
            }
        }
    }
}

void col2im_add(const double* cols, const ConvShapes& s, const ConvParams& p, std::size_t oy0,
                std::size_t band_h, double* x) {
    const std::size_t ncols = band_h * s.out_w;
    for (std::size_t c = 0; c < s.in_ch; ++c) {
        for (std::size_t ky = 0; ky < s.kh; ++ky) {
            for (std::size_t kx = 0; kx < s.kw; ++kx) {
                const double* row = cols + ((c * s.kh + ky) * s.kw + kx) * ncols;
                for (std::size_t oy = 0; oy < band_h; ++oy) {
                    const long iy = static_cast<long>(oy0 + oy) * p.stride_y - p.pad_top +
                                    static_cast<long>(ky);
                    if (iy < 0 || iy >= static_cast<long>(s.in_h)) continue;
                    for (std::size_t ox = 0; ox < s.out_w; ++ox) {
                        const long ix = static_cast<long>(ox) * p.stride_x - p.pad_left +
                                        static_cast<long>(kx);
                        if (ix < 0 || ix >= static_cast<long>(s.in_w)) continue;
                        x[(c * s.in_h + static_cast<std::size_t>(iy)) * s.in_w +
                          static_cast<std::size_t>(ix)] += row[oy * s.out_w + ox];
                    }
                }
            }
        }
    }
}

}  // namespace

ConvParams ConvParams::same(int kh, int kw) {
    ConvParams p;
    p.pad_top = (kh - 1) / 2;
    p.pad_bottom = kh - 1 - p.pad_top;
    p.pad_left = (kw - 1) / 2;
    p.pad_right = kw - 1 - p.pad_left;
    return p;
}

Tensor conv_forward(const Tensor& x, const Tensor& w, const std::vector<double>& bias,
                    const ConvParams& p) {
    pin_blas_threads();
    const ConvShapes s = resolve_shapes(x, w, p);
    if (!bias.empty() && bias.size() != s.out_ch) {
        throw ShapeError("bias size " + std::to_string(bias.size()) +
                         " does not match output channel count " + std::to_string(s.out_ch));
    }
    const std::size_t kdim = s.in_ch * s.kh * s.kw;
    const std::size_t ncols = s.out_h * s.out_w;
    const std::size_t band = band_rows_for(s);
    std::vector<double> cols(kdim * band * s.out_w);
    Tensor out = s.was_1d ? Tensor({s.batch, s.out_ch, s.out_w})
                          : Tensor({s.batch, s.out_ch, s.out_h, s.out_w});
    const std::size_t in_stride = s.in_ch * s.in_h * s.in_w;
    const std::size_t out_stride = s.out_ch * ncols;
    for (std::size_t b = 0; b < s.batch; ++b) {
        for (std::size_t oy0 = 0; oy0 < s.out_h; oy0 += band) {
            const std::size_t bh = std::min(band, s.out_h - oy0);
            const std::size_t bpx = bh * s.out_w;
            im2col(x.data() + b * in_stride, s, p, oy0, bh, cols.data());
            // The band is a column block of the full output matrix, addressed
            // through the full leading dimension ncols.
            cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, static_cast<int>(s.out_ch),
                        static_cast<int>(bpx), static_cast<int>(kdim), 1.0, w.data(),
                        static_cast<int>(kdim), cols.data(), static_cast<int>(bpx), 0.0,
                        out.data() + b * out_stride + oy0 * s.out_w, static_cast<int>(ncols));
        }
        if (!bias.empty()) {
            for (std::size_t o = 0; o < s.out_ch; ++o) {
                double* dst = out.data() + b * out_stride + o * ncols;
                for (std::size_t n = 0; n < ncols; ++n) dst[n] += bias[o];
            }
        }
    }
    return out;
}

ConvGrads conv_backward(const Tensor& x, const Tensor& w, const ConvParams& p,
                        const Tensor& grad_out) {
    pin_blas_threads();
    const ConvShapes s = resolve_shapes(x, w, p);
    const std::vector<std::size_t> want =
        s.was_1d ? std::vector<std::size_t>{s.batch, s.out_ch, s.out_w}
                 : std::vector<std::size_t>{s.batch, s.out_ch, s.out_h, s.out_w};
    if (grad_out.shape() != want) {
        throw ShapeError("grad_out shape " + shape_to_string(grad_out.shape()) +
                         " does not match conv output shape " + shape_to_string(want));
    }
    const std::size_t kdim = s.in_ch * s.kh * s.kw;
    const std::size_t ncols = s.out_h * s.out_w;
    const std::size_t band = band_rows_for(s);
    std::vector<double> cols(kdim * band * s.out_w);
    std::vector<double> grad_cols(kdim * band * s.out_w);
    std::vector<double> go_band(s.out_ch * band * s.out_w);

    ConvGrads g{Tensor(x.shape()), Tensor(w.shape()), Tensor({s.out_ch})};
    const std::size_t in_stride = s.in_ch * s.in_h * s.in_w;
    const std::size_t out_stride = s.out_ch * ncols;
    for (std::size_t b = 0; b < s.batch; ++b) {
        const double* go = grad_out.data() + b * out_stride;
        for (std::size_t oy0 = 0; oy0 < s.out_h; oy0 += band) {
            const std::size_t bh = std::min(band, s.out_h - oy0);
            const std::size_t bpx = bh * s.out_w;
            // Gather the band of upstream gradients into contiguous rows.
            for (std::size_t o = 0; o < s.out_ch; ++o) {
                const double* src = go + o * ncols + oy0 * s.out_w;
                std::copy(src, src + bpx, go_band.data() + o * bpx);
            }
            im2col(x.data() + b * in_stride, s, p, oy0, bh, cols.data());
            // grad_w += go_band . cols^T
            cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasTrans, static_cast<int>(s.out_ch),
                        static_cast<int>(kdim), static_cast<int>(bpx), 1.0, go_band.data(),
                        static_cast<int>(bpx), cols.data(), static_cast<int>(bpx), 1.0,
                        g.w.data(), static_cast<int>(kdim));
            // grad_cols = w^T . go_band
            cblas_dgemm(CblasRowMajor, CblasTrans, CblasNoTrans, static_cast<int>(kdim),
                        static_cast<int>(bpx), static_cast<int>(s.out_ch), 1.0, w.data(),
                        static_cast<int>(kdim), go_band.data(), static_cast<int>(bpx), 0.0,
                        grad_cols.data(), static_cast<int>(bpx));
            col2im_add(grad_cols.data(), s, p, oy0, bh, g.x.data() + b * in_stride);
        }
        for (std::size_t o = 0; o < s.out_ch; ++o) {
            double acc = 0.0;
            const double* row = go + o * ncols;
            for (std::size_t n = 0; n < ncols; ++n) acc += row[n];
            g.b[o] += acc;
        }
    }
    return g;
}

}  // namespace ckfree
