// Copyright 2026 the checkerfree authors
// SPDX-License-Identifier: Apache-2.0

#include "ckfree/training.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace ckfree {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw ShapeError(msg);
}

void require_arg(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

// Catmull-Rom-style cubic, a = -0.5.
double cubic(double t) {
    const double x = std::abs(t);
    if (x <= 1.0) return (1.5 * x - 2.5) * x * x + 1.0;
    if (x < 2.0) return ((-0.5 * x + 2.5) * x - 4.0) * x + 2.0;
    return 0.0;
}

struct ResampleTaps {
    int first = 0;  // tap j covers input index U*o + first + j
    std::vector<double> weight;
};

// The anti-aliased kernel cubic(d/U)/U evaluated at the fixed lattice of
// offsets shared by every output sample: output o sits at input coordinate
// U*o + (U-1)/2, so the relative tap pattern does not depend on o.
ResampleTaps make_taps(int U) {
    const double center = (U - 1) / 2.0;
    ResampleTaps taps;
    taps.first = static_cast<int>(std::ceil(center - 2.0 * U));
    const int last = static_cast<int>(std::floor(center + 2.0 * U));
    double sum = 0.0;
    for (int r = taps.first; r <= last; ++r) {
        const double w = cubic((center - r) / U) / U;
        taps.weight.push_back(w);
        sum += w;
    }
    // Normalize so constants survive exactly.
    for (double& w : taps.weight) w /= sum;
    return taps;
}

// Downscales every length-n row of a contiguous block by U with clamped
// borders. in/out are (rows x n) and (rows x n/U).
void downscale_rows(const double* in, double* out, std::size_t rows, std::size_t n, int U,
                    const ResampleTaps& taps) {
    const std::size_t on = n / U;
    for (std::size_t r = 0; r < rows; ++r) {
        const double* src = in + r * n;
        double* dst = out + r * on;
        for (std::size_t o = 0; o < on; ++o) {
            double acc = 0.0;
            const long base = static_cast<long>(o) * U + taps.first;
            for (std::size_t j = 0; j < taps.weight.size(); ++j) {
                long idx = base + static_cast<long>(j);
                idx = std::clamp<long>(idx, 0, static_cast<long>(n) - 1);
                acc += taps.weight[j] * src[idx];
            }
            dst[o] = acc;
        }
    }
}

}  // namespace

void TrainConfig::validate() const {
    require_arg(learning_rate > 0.0, "train: learning rate must be positive");
    require_arg(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0,
                "train: betas must lie in [0, 1)");
    require_arg(epsilon > 0.0, "train: epsilon must be positive");
    require_arg(batch_size >= 1, "train: batch size must be >= 1");
    require_arg(iterations >= 1, "train: iteration count must be >= 1");
    require_arg(hr_patch >= 1 && stride >= 1, "train: patch size and stride must be >= 1");
}

void SRDataset::append(SRDataset other) {
    if (empty()) {
        *this = std::move(other);
        return;
    }
    require(other.factor == factor, "SRDataset::append: factors disagree");
    lr.insert(lr.end(), std::make_move_iterator(other.lr.begin()),
              std::make_move_iterator(other.lr.end()));
    hr.insert(hr.end(), std::make_move_iterator(other.hr.begin()),
              std::make_move_iterator(other.hr.end()));
}

Tensor bicubic_downscale(const Tensor& img, int factor) {
    require_arg(factor >= 1, "bicubic_downscale: factor must be >= 1");
    require(img.rank() == 3 || img.rank() == 4, "bicubic_downscale: rank-3/4 tensor expected");
    if (factor == 1) return img;
    const int U = factor;
    const bool is_1d = img.rank() == 3;
    const std::size_t B = img.dim(0), C = img.dim(1);
    const std::size_t H = is_1d ? 1 : img.dim(2);
    const std::size_t W = img.dim(is_1d ? 2 : 3);
    require(W % U == 0 && (is_1d || H % U == 0),
            "bicubic_downscale: spatial dimensions must be divisible by the factor (crop first)");

    const ResampleTaps taps = make_taps(U);
    if (is_1d) {
        Tensor out({B, C, W / U});
        downscale_rows(img.data(), out.data(), B * C, W, U, taps);
        return out;
    }

    // Separable: columns of each row image first, then rows of the result.
    const std::size_t OW = W / U, OH = H / U;
    std::vector<double> half(B * C * H * OW);
    downscale_rows(img.data(), half.data(), B * C * H, W, U, taps);

    Tensor out({B, C, OH, OW});
    std::vector<double> col(H), dcol(OH);
    for (std::size_t bc = 0; bc < B * C; ++bc)
        for (std::size_t x = 0; x < OW; ++x) {
            for (std::size_t y = 0; y < H; ++y) col[y] = half[(bc * H + y) * OW + x];
            downscale_rows(col.data(), dcol.data(), 1, H, U, taps);
            for (std::size_t y = 0; y < OH; ++y) out.data()[(bc * OH + y) * OW + x] = dcol[y];
        }
    return out;
}

SRDataset extract_patches(const Tensor& hr_image, int factor, int hr_size, int stride) {
    require_arg(factor >= 1, "extract_patches: factor must be >= 1");
    require_arg(hr_size >= factor && hr_size % factor == 0,
                "extract_patches: patch size must be a positive multiple of the factor");
    require_arg(stride >= 1 && stride % factor == 0,
                "extract_patches: stride must be a positive multiple of the factor");
    require(hr_image.rank() == 4 && hr_image.dim(0) == 1 && hr_image.dim(1) == 1,
            "extract_patches: (1,1,H,W) luminance image expected");

    SRDataset set;
    set.factor = factor;
    const std::size_t H = hr_image.dim(2), W = hr_image.dim(3);
    if (H < static_cast<std::size_t>(hr_size) || W < static_cast<std::size_t>(hr_size)) {
        std::cerr << "extract_patches: image " << W << "x" << H
                  << " is smaller than one " << hr_size << "-pixel patch; skipping\n";
        return set;
    }

    const Tensor lr_full = bicubic_downscale(hr_image, factor);
    const std::size_t lr_size = static_cast<std::size_t>(hr_size) / factor;
    for (std::size_t y0 = 0; y0 + hr_size <= H; y0 += stride)
        for (std::size_t x0 = 0; x0 + hr_size <= W; x0 += stride) {
            Tensor hp({1, 1, static_cast<std::size_t>(hr_size),
                       static_cast<std::size_t>(hr_size)});
            for (std::size_t y = 0; y < static_cast<std::size_t>(hr_size); ++y)
                for (std::size_t x = 0; x < static_cast<std::size_t>(hr_size); ++x)
                    hp.at4(0, 0, y, x) = hr_image.at4(0, 0, y0 + y, x0 + x);
            Tensor lp({1, 1, lr_size, lr_size});
            const std::size_t ly0 = y0 / factor, lx0 = x0 / factor;
            for (std::size_t y = 0; y < lr_size; ++y)
                for (std::size_t x = 0; x < lr_size; ++x)
                    lp.at4(0, 0, y, x) = lr_full.at4(0, 0, ly0 + y, lx0 + x);
            set.hr.push_back(std::move(hp));
            set.lr.push_back(std::move(lp));
        }
    return set;
}

MseResult mse_loss(const Tensor& pred, const Tensor& target) {
    require(pred.same_shape(target), "mse_loss: prediction shape " +
                                         shape_to_string(pred.shape()) +
                                         " does not match target " +
                                         shape_to_string(target.shape()));
    const double n = static_cast<double>(pred.size());
    MseResult r;
    r.grad = Tensor(pred.shape());
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        acc += d * d;
        r.grad[i] = d / n;
    }
    r.value = 0.5 * acc / n;
    return r;
}

void adam_step(const std::vector<ParamRef>& params, const std::vector<ParamRef>& grads,
               AdamState& state, long t, const TrainConfig& cfg) {
    require_arg(t >= 1, "adam_step: step counter must be >= 1");
    require(params.size() == grads.size(), "adam_step: parameter/gradient block count mismatch");
    if (state.m.empty()) {
        state.m.resize(params.size());
        state.v.resize(params.size());
        for (std::size_t i = 0; i < params.size(); ++i) {
            state.m[i].assign(params[i].values->size(), 0.0);
            state.v[i].assign(params[i].values->size(), 0.0);
        }
    }
    require(state.m.size() == params.size(), "adam_step: state does not match parameter blocks");

    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        std::vector<double>& p = *params[i].values;
        const std::vector<double>& g = *grads[i].values;
        require(p.size() == g.size() && p.size() == state.m[i].size(),
                "adam_step: block size mismatch in " + params[i].name);
        for (std::size_t j = 0; j < p.size(); ++j) {
            state.m[i][j] = cfg.beta1 * state.m[i][j] + (1.0 - cfg.beta1) * g[j];
            state.v[i][j] = cfg.beta2 * state.v[i][j] + (1.0 - cfg.beta2) * g[j] * g[j];
            const double mhat = state.m[i][j] / bc1;
            const double vhat = state.v[i][j] / bc2;
            p[j] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
        }
    }
}

TrainResult train(const NetworkConfig& net_cfg, const TrainConfig& train_cfg,
                  const SRDataset& data,
                  const std::function<void(int, const SRNetWeights&)>& checkpoint_hook,
                  int checkpoint_every) {
    net_cfg.validate();
    train_cfg.validate();
    require_arg(!data.empty(), "train: dataset is empty");
    require_arg(data.factor == net_cfg.factor(),
                "train: dataset factor does not match the network factor");
    require(data.lr.size() == data.hr.size(), "train: unpaired dataset");

    const std::size_t n = data.size();
    const std::size_t lh = data.lr[0].dim(2), lw = data.lr[0].dim(3);
    const std::size_t hh = data.hr[0].dim(2), hw = data.hr[0].dim(3);
    for (std::size_t i = 0; i < n; ++i)
        require(data.lr[i].dim(2) == lh && data.lr[i].dim(3) == lw &&
                    data.hr[i].dim(2) == hh && data.hr[i].dim(3) == hw,
                "train: all patches must share one size");

    TrainResult result;
    result.weights = init_he(net_cfg, net_cfg.seed);
    std::vector<ParamRef> params = parameter_refs(result.weights);
    AdamState state;

    // Epoch-shuffled sample order; short datasets wrap within a batch.
    std::mt19937_64 rng(net_cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t cursor = 0;
    auto next_index = [&] {
        if (cursor == n) {
            std::shuffle(order.begin(), order.end(), rng);
            cursor = 0;
        }
        return order[cursor++];
    };

    const std::size_t B = static_cast<std::size_t>(train_cfg.batch_size);
    Tensor lr_batch({B, 1, lh, lw});
    Tensor hr_batch({B, 1, hh, hw});
    result.loss_history.reserve(static_cast<std::size_t>(train_cfg.iterations));

    for (int t = 1; t <= train_cfg.iterations; ++t) {
        for (std::size_t b = 0; b < B; ++b) {
            const std::size_t idx = next_index();
            std::copy(data.lr[idx].data(), data.lr[idx].data() + lh * lw,
                      lr_batch.data() + b * lh * lw);
            std::copy(data.hr[idx].data(), data.hr[idx].data() + hh * hw,
                      hr_batch.data() + b * hh * hw);
        }

        ForwardCache cache = forward_cached(net_cfg, result.weights, lr_batch);
        MseResult loss = mse_loss(cache.y, hr_batch);
        if (!std::isfinite(loss.value))
            throw std::runtime_error("training diverged: non-finite loss " +
                                     std::to_string(loss.value) + " at iteration " +
                                     std::to_string(t));
        result.loss_history.push_back(loss.value);

        SRNetGrads grads = backward(net_cfg, result.weights, cache, loss.grad);
        adam_step(params, parameter_refs(grads), state, t, train_cfg);

        if (checkpoint_hook && checkpoint_every > 0 && t % checkpoint_every == 0)
            checkpoint_hook(t, result.weights);
    }
    return result;
}

double psnr(const Tensor& pred, const Tensor& target, double peak) {
    require(pred.same_shape(target), "psnr: shape mismatch");
    require_arg(peak > 0.0, "psnr: peak must be positive");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        acc += d * d;
    }
    const double mse = acc / static_cast<double>(pred.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

NetworkConfig apply_approach_a(const NetworkConfig& cfg) {
    cfg.validate();
    require_arg(cfg.upsampler.kind != UpsamplerKind::resize_conv,
                "apply_approach_a: resize convolution has nothing to correct");
    NetworkConfig out = cfg;
    if (cfg.upsampler.correction != Correction::none) {
        // The configuration holds a single post-filter slot, so only the
        // gain changes here; the result is a deliberately degraded network.
        std::cerr << "apply_approach_a: network is already corrected ("
                  << to_string(cfg.upsampler.correction)
                  << "); re-applying only adjusts the output gain (misuse)\n";
    }
    out.upsampler.correction = Correction::post_h0;
    double gain = 1.0 / cfg.factor();
    if (cfg.dims() == 2) gain *= gain;
    out.output_scale = cfg.output_scale * gain;
    return out;
}

Tensor make_synthetic_image(int index, int height, int width) {
    require_arg(height >= 1 && width >= 1, "make_synthetic_image: size must be positive");
    std::mt19937_64 rng(0xC0FFEEull + static_cast<std::uint64_t>(index) * 7919u);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Tensor img = Tensor::zeros({1, 1, static_cast<std::size_t>(height),
                                static_cast<std::size_t>(width)});
    // Smooth background: a few random-phase low-frequency waves.
    struct Wave {
        double fy, fx, phase, amp;
    };
    std::vector<Wave> waves;
    for (int i = 0; i < 5; ++i)
        waves.push_back({(0.5 + 2.5 * unit(rng)) / height, (0.5 + 2.5 * unit(rng)) / width,
                         unit(rng) * 6.283185307179586, 0.25 + 0.35 * unit(rng)});
    // Fine texture so the SR task has detail to restore.
    const double tfy = (6.0 + 6.0 * unit(rng)) / height;
    const double tfx = (6.0 + 6.0 * unit(rng)) / width;
    const double tphase = unit(rng) * 6.283185307179586;

    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            double v = 0.0;
            for (const Wave& w : waves)
                v += w.amp * std::sin(6.283185307179586 * (w.fy * y + w.fx * x) + w.phase);
            v += 0.2 * std::sin(6.283185307179586 * (tfy * y * 4 + tfx * x * 4) + tphase);
            img.at4(0, 0, y, x) = v;
        }

    // Sharp-edged rectangles on top, to exercise edge reconstruction.
    for (int rect = 0; rect < 4; ++rect) {
        const int ry = static_cast<int>(unit(rng) * height * 0.75);
        const int rx = static_cast<int>(unit(rng) * width * 0.75);
        const int rh = 2 + static_cast<int>(unit(rng) * height * 0.25);
        const int rw = 2 + static_cast<int>(unit(rng) * width * 0.25);
        const double level = 1.2 * unit(rng) - 0.6;
        for (int y = ry; y < std::min(height, ry + rh); ++y)
            for (int x = rx; x < std::min(width, rx + rw); ++x) img.at4(0, 0, y, x) += level;
    }

    // Affinely squeeze into [0.02, 0.98].
    const double lo = img.min(), hi = img.max();
    const double span = hi > lo ? hi - lo : 1.0;
    for (double& v : img.vec()) v = 0.02 + 0.96 * (v - lo) / span;
    return img;
}

}  // namespace ckfree
