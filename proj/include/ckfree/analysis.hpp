// Copyright 2026 the checkerfree authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "ckfree/network.hpp"
#include "ckfree/tensor.hpp"
#include "ckfree/upsample.hpp"

namespace ckfree {

/// Per-phase interior statistics of a (claimed) periodic steady-state signal.
/// Entries are indexed by output residue: phase p (1-D), or row-major
/// (p_row * U + p_col) in 2-D.
struct PhaseStats {
    std::vector<double> mean;
    std::vector<double> stddev;  // population std; ~0 for a true steady state
};

struct StepResponseReport {
    int factor = 0;
    int dims = 2;
    int input_size = 0;
    int margin = 0;
    std::vector<double> phase_values;
    std::vector<double> phase_stddev;
    double score = 0.0;  // max - min of phase_values
    // Analytic prediction sum_c A_c * dc(R_{c,n}) + b_n, filled for
    // deconvolution and sub-pixel upsamplers.
    bool prediction_available = false;
    std::vector<double> predicted;
    double max_prediction_error = 0.0;
    // Empirically measured per-channel steady states A_c after the second
    // activation, and whether every pre-activation steady state is positive
    // (if not, a ReLU is pinned at zero and A_c degenerates to 0; the
    // prediction still holds but the configuration is reported as degenerate).
    std::vector<double> channel_steady;
    bool all_channels_positive = false;
    double tolerance_used = 0.0;
};

/// All-ones (scaled) test input: the discrete unit step over the analyzed
/// window, as a (1,1,size) or (1,1,size,size) tensor.
Tensor unit_step(int size, int dims, double scale = 1.0);

/// Interior per-phase means/deviations of a single-image tensor
/// ((1,1,L) or (1,1,H,W)). Interval [margin, size - margin) per axis must
/// contain at least one full period; otherwise a ShapeError names the
/// required minimum size.
PhaseStats steady_state_phases(const Tensor& y, int U, int margin);

/// Steady-state prediction for a sub-pixel layer (or a deconvolution layer
/// expressed through its phase kernels): f_n = sum_c A_c * dc(R_{c,n}) + b_n.
std::vector<double> predict_subpixel_steady_state(const std::vector<double>& channel_steady,
                                                  const UpsamplerWeights& subpixel_weights);

/// Analysis margin and the smallest usable step-input size for a network.
int analysis_margin(const NetworkConfig& cfg);
int min_step_input_size(const NetworkConfig& cfg);

/// Feeds a unit step through the network and measures the per-phase steady
/// states of the output; for deconvolution / sub-pixel upsamplers also fills
/// the analytic prediction from the empirically measured A_c.
StepResponseReport network_step_report(const NetworkConfig& cfg, const SRNetWeights& w,
                                       int input_size, double step_scale = 1.0);

/// Per-pixel deviation from the mean of the aligned U x U tile (U-run in
/// 1-D); zero everywhere iff the image carries no periodic offset pattern.
Tensor checkerboard_map(const Tensor& image, int U);

}  // namespace ckfree
