// Copyright 2026 the checkerfree authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ckfree/network.hpp"
#include "ckfree/tensor.hpp"

namespace ckfree {

/// Desk-scale training protocol: full optimizer settings, but an iteration
/// budget sized for minutes on a CPU rather than a production schedule.
struct TrainConfig {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int batch_size = 4;
    int iterations = 2000;
    int hr_patch = 72;  // LR patch size is hr_patch / U
    int stride = 72;    // patch grid stride, in HR pixels
    void validate() const;
};

/// Aligned (LR, HR) patch pairs, both stored as (1, 1, h, w) luminance
/// tensors with HR exactly factor x the LR size.
struct SRDataset {
    int factor = 0;
    std::vector<Tensor> lr;
    std::vector<Tensor> hr;

    std::size_t size() const { return hr.size(); }
    bool empty() const { return hr.empty(); }
    void append(SRDataset other);  // factors must agree
};

/// Bicubic resampling to 1/U size with the a = -0.5 cubic, anti-aliased by
/// stretching the kernel support by U. Weights are normalized (constants are
/// preserved exactly) and the borders clamp-replicate. Spatial dimensions
/// must be divisible by U; U = 1 returns a copy.
Tensor bicubic_downscale(const Tensor& img, int factor);

/// Crops HR patches of hr_size on a stride grid anchored at the top-left and
/// pairs each with the aligned window of the bicubic-downscaled image.
/// hr_size and stride must be multiples of the factor. An image smaller than
/// one patch yields an empty dataset (with a warning on stderr).
SRDataset extract_patches(const Tensor& hr_image, int factor, int hr_size, int stride);

struct MseResult {
    double value = 0.0;
    Tensor grad;  // d(value)/d(pred), shape of pred
};

/// One-half mean squared error: 0.5 * mean((target - pred)^2).
MseResult mse_loss(const Tensor& pred, const Tensor& target);

/// Adam first/second moment buffers, one pair per parameter block, laid out
/// to match a parameter_refs() ordering.
struct AdamState {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
};

/// Standard bias-corrected Adam update, step counter t >= 1. An empty state
/// initializes itself to zeros on first use.
void adam_step(const std::vector<ParamRef>& params, const std::vector<ParamRef>& grads,
               AdamState& state, long t, const TrainConfig& cfg);

struct TrainResult {
    SRNetWeights weights;
    std::vector<double> loss_history;  // one entry per iteration
};

/// MSE training with Adam over shuffled minibatches. Fully deterministic for
/// a fixed NetworkConfig::seed (He init, shuffling order, update order). A
/// non-finite loss aborts with std::runtime_error naming the iteration. The
/// optional hook runs every checkpoint_every iterations when positive.
TrainResult train(const NetworkConfig& net_cfg, const TrainConfig& train_cfg,
                  const SRDataset& data,
                  const std::function<void(int, const SRNetWeights&)>& checkpoint_hook = {},
                  int checkpoint_every = 0);

/// Peak signal-to-noise ratio in dB with the conventional (unhalved) MSE.
/// Identical tensors return +infinity.
double psnr(const Tensor& pred, const Tensor& target, double peak);

/// Post-training correction: appends the hold-kernel post-filter and folds
/// the 1/U-per-axis gain compensation into output_scale. Weight values are
/// untouched. Rejects resize-convolution networks (nothing to correct) and
/// warns when the input is already corrected: the configuration can carry
/// only one post-filter, so a second application adjusts the gain alone,
/// which is documented misuse.
NetworkConfig apply_approach_a(const NetworkConfig& cfg);

/// Deterministic grayscale test texture in [0, 1]: smooth fields, sharp
/// edges, and fine oscillations mixed per index. Used for the bundled
/// desk-scale dataset and the benchmarks.
Tensor make_synthetic_image(int index, int height, int width);

}  // namespace ckfree
