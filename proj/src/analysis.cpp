// Copyright 2026 the checkerfree authors
// SPDX-License-Identifier: Apache-2.0

#include "ckfree/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ckfree {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw ShapeError(msg);
}

// Boundary contamination depth of the two same-padded conv layers, in input
// samples.
int conv_stack_margin(const NetworkConfig& cfg) { return (cfg.k1 + cfg.k2 + 1) / 2; }

}  // namespace

Tensor unit_step(int size, int dims, double scale) {
    if (size < 1) throw std::invalid_argument("unit_step: size must be >= 1");
    if (dims == 1) return Tensor::full({1, 1, static_cast<std::size_t>(size)}, scale);
    if (dims == 2)
        return Tensor::full({1, 1, static_cast<std::size_t>(size),
                             static_cast<std::size_t>(size)}, scale);
    throw std::invalid_argument("unit_step: dims must be 1 or 2");
}

PhaseStats steady_state_phases(const Tensor& y, int U, int margin) {
    if (U < 1) throw std::invalid_argument("steady_state_phases: factor must be >= 1");
    if (margin < 0) throw std::invalid_argument("steady_state_phases: margin must be >= 0");
    require((y.rank() == 3 || y.rank() == 4) && y.dim(0) == 1 && y.dim(1) == 1,
            "steady_state_phases: expected a single-image (1,1,...) tensor");
    const bool is_1d = y.rank() == 3;
    const int H = is_1d ? 1 : static_cast<int>(y.dim(2));
    const int W = static_cast<int>(y.dim(is_1d ? 2 : 3));
    const int lo_y = is_1d ? 0 : margin;
    const int hi_y = is_1d ? 1 : H - margin;
    const int lo_x = margin;
    const int hi_x = W - margin;
    // The interior must hold one full period per axis so every phase is
    // represented.
    if (hi_x - lo_x < U || (!is_1d && hi_y - lo_y < U))
        throw ShapeError("steady_state_phases: interior is too small; the signal must be at "
                         "least 2*margin + U = " + std::to_string(2 * margin + U) +
                         " samples per axis");

    const int P = is_1d ? U : U * U;
    PhaseStats st;
    st.mean.assign(P, 0.0);
    st.stddev.assign(P, 0.0);
    std::vector<long> count(P, 0);
    auto phase_of = [&](int yy, int xx) { return is_1d ? xx % U : (yy % U) * U + xx % U; };
    for (int yy = lo_y; yy < hi_y; ++yy)
        for (int xx = lo_x; xx < hi_x; ++xx) {
            const double v = is_1d ? y.at3(0, 0, xx) : y.at4(0, 0, yy, xx);
            const int p = phase_of(yy, xx);
            st.mean[p] += v;
            ++count[p];
        }
    for (int p = 0; p < P; ++p) st.mean[p] /= static_cast<double>(count[p]);
    for (int yy = lo_y; yy < hi_y; ++yy)
        for (int xx = lo_x; xx < hi_x; ++xx) {
            const double v = is_1d ? y.at3(0, 0, xx) : y.at4(0, 0, yy, xx);
            const int p = phase_of(yy, xx);
            const double d = v - st.mean[p];
            st.stddev[p] += d * d;
        }
    for (int p = 0; p < P; ++p) st.stddev[p] = std::sqrt(st.stddev[p] / count[p]);
    return st;
}

std::vector<double> predict_subpixel_steady_state(const std::vector<double>& channel_steady,
                                                  const UpsamplerWeights& w) {
    require(w.kernel.rank() == 3 || w.kernel.rank() == 4,
            "predict: weights must be sub-pixel phase kernels (P,C,...)");
    const int P = static_cast<int>(w.kernel.dim(0));
    const int C = static_cast<int>(w.kernel.dim(1));
    require(static_cast<int>(channel_steady.size()) == C,
            "predict: one steady value per input channel required");
    require(static_cast<int>(w.bias.size()) == P, "predict: one bias per phase required");
    const std::size_t spatial = w.kernel.size() / (static_cast<std::size_t>(P) * C);

    std::vector<double> out(P, 0.0);
    for (int n = 0; n < P; ++n) {
        double v = 0.0;
        for (int c = 0; c < C; ++c) {
            double dc = 0.0;
            const double* taps = w.kernel.data() + (static_cast<std::size_t>(n) * C + c) * spatial;
            for (std::size_t j = 0; j < spatial; ++j) dc += taps[j];
            v += channel_steady[c] * dc;
        }
        out[n] = v + w.bias[n];
    }
    return out;
}

int analysis_margin(const NetworkConfig& cfg) {
    return (cfg.receptive_field_out() + 1) / 2 + cfg.factor();
}

int min_step_input_size(const NetworkConfig& cfg) {
    const int U = cfg.factor();
    const int need = 2 * analysis_margin(cfg) + U;  // output samples
    return (need + U - 1) / U;
}

StepResponseReport network_step_report(const NetworkConfig& cfg, const SRNetWeights& w,
                                       int input_size, double step_scale) {
    cfg.validate();
    const int U = cfg.factor();
    const int dims = cfg.dims();
    const int margin = analysis_margin(cfg);
    const int min_size = min_step_input_size(cfg);
    if (input_size < min_size)
        throw ShapeError("network_step_report: input size " + std::to_string(input_size) +
                         " too small for this network; need at least " +
                         std::to_string(min_size));

    const Tensor x = unit_step(input_size, dims, step_scale);
    const ForwardCache cache = forward_cached(cfg, w, x);

    StepResponseReport rep;
    rep.factor = U;
    rep.dims = dims;
    rep.input_size = input_size;
    rep.margin = margin;

    PhaseStats st = steady_state_phases(cache.y, U, margin);
    rep.phase_values = st.mean;
    rep.phase_stddev = st.stddev;
    rep.score = *std::max_element(st.mean.begin(), st.mean.end()) -
                *std::min_element(st.mean.begin(), st.mean.end());

    // Channel steady states after the second activation, measured away from
    // the conv boundary halo.
    const int m_lr = conv_stack_margin(cfg);
    if (input_size - 2 * m_lr >= 1 && cfg.upsampler.kind != UpsamplerKind::resize_conv) {
        const int C = cfg.n2;
        const bool is_1d = dims == 1;
        rep.channel_steady.assign(C, 0.0);
        rep.all_channels_positive = true;
        const int lo = m_lr, hi = input_size - m_lr;
        for (int c = 0; c < C; ++c) {
            double sum = 0.0;
            double zmin = 0.0;
            bool first = true;
            for (int yy = (is_1d ? 0 : lo); yy < (is_1d ? 1 : hi); ++yy)
                for (int xx = lo; xx < hi; ++xx) {
                    const double a = is_1d ? cache.a2.at3(0, c, xx) : cache.a2.at4(0, c, yy, xx);
                    const double z = is_1d ? cache.z2.at3(0, c, xx) : cache.z2.at4(0, c, yy, xx);
                    sum += a;
                    zmin = first ? z : std::min(zmin, z);
                    first = false;
                }
            const long n = static_cast<long>(hi - lo) * (is_1d ? 1 : hi - lo);
            rep.channel_steady[c] = sum / static_cast<double>(n);
            if (zmin <= 0.0) rep.all_channels_positive = false;
        }

        // Phase kernels of the upsampler, as seen from the coarse grid.
        UpsamplerWeights phases;
        if (cfg.upsampler.kind == UpsamplerKind::subpixel) {
            phases = w.up;
        } else if (cfg.upsampler.correction == Correction::inside_h0) {
            UpsamplerWeights eff;
            eff.kernel = approach_c_effective_kernel(w.up.kernel, U);
            eff.bias = w.up.bias;
            phases = subpixel_kernels_from_deconv(eff, U);
        } else {
            phases = subpixel_kernels_from_deconv(w.up, U);
        }
        std::vector<double> pred = predict_subpixel_steady_state(rep.channel_steady, phases);
        if (cfg.upsampler.correction == Correction::post_h0) {
            // The hold-kernel window sums one representative of every phase,
            // so all corrected phases share the total.
            double total = 0.0;
            for (double v : pred) total += v;
            std::fill(pred.begin(), pred.end(), total);
        }
        for (double& v : pred) v *= cfg.output_scale;
        rep.predicted = std::move(pred);
        rep.prediction_available = true;
        for (std::size_t i = 0; i < rep.predicted.size(); ++i)
            rep.max_prediction_error = std::max(rep.max_prediction_error,
                                                std::abs(rep.predicted[i] - rep.phase_values[i]));
    }
    return rep;
}

Tensor checkerboard_map(const Tensor& image, int U) {
    if (U < 1) throw std::invalid_argument("checkerboard_map: factor must be >= 1");
    require(image.rank() == 3 || image.rank() == 4, "checkerboard_map: rank-3/4 image expected");
    const bool is_1d = image.rank() == 3;
    const int B = static_cast<int>(image.dim(0));
    const int C = static_cast<int>(image.dim(1));
    const int H = is_1d ? 1 : static_cast<int>(image.dim(2));
    const int W = static_cast<int>(image.dim(is_1d ? 2 : 3));

    Tensor out = Tensor::zeros(image.shape());
    auto get = [&](int b, int c, int yy, int xx) {
        return is_1d ? image.at3(b, c, xx) : image.at4(b, c, yy, xx);
    };
    auto put = [&](int b, int c, int yy, int xx, double v) {
        if (is_1d)
            out.at3(b, c, xx) = v;
        else
            out.at4(b, c, yy, xx) = v;
    };
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c)
            for (int ty = 0; ty < H; ty += is_1d ? 1 : U)
                for (int tx = 0; tx < W; tx += U) {
                    const int ey = is_1d ? ty + 1 : std::min(ty + U, H);
                    const int ex = std::min(tx + U, W);
                    double mean = 0.0;
                    for (int yy = ty; yy < ey; ++yy)
                        for (int xx = tx; xx < ex; ++xx) mean += get(b, c, yy, xx);
                    mean /= static_cast<double>((ey - ty) * (ex - tx));
                    for (int yy = ty; yy < ey; ++yy)
                        for (int xx = tx; xx < ex; ++xx)
                            put(b, c, yy, xx, std::abs(get(b, c, yy, xx) - mean));
                }
    return out;
}

}  // namespace ckfree
