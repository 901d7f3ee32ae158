// Copyright 2026 the checkerfree authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ckfree/checkpoint.hpp"
#include "ckfree/multirate.hpp"
#include "ckfree/network.hpp"

namespace ckfree {

// Command implementations behind the `checkerfree` executable. Each cmd_*
// returns the process exit code: 0 success/pass, 1 analysis-failure verdict,
// 2 usage or I/O error (usually raised as an exception and mapped in main).
// Every command writes exactly one run manifest next to its primary output.

/// Per-channel lint result: the phase-DC avoidance check and the H0 long
/// division of the channel's effective interpolation kernel.
struct ChannelLint {
    int channel = 0;
    AvoidanceReport avoidance;
    H0Factorization factorization;
};

struct LintReport {
    UpsamplerKind kind = UpsamplerKind::deconv;
    Correction correction = Correction::none;
    int factor = 0;
    int dims = 2;
    double tol = 0.0;
    bool trivial = false;  // U = 1 or resize convolution: nothing to check
    std::string note;
    std::vector<ChannelLint> channels;
    // Sub-pixel layers only: max |bias_p - mean bias|. Unequal per-phase
    // biases are a phase offset of their own, so without a post filter they
    // count against the verdict.
    double bias_spread = 0.0;
    bool bias_spread_counts = false;
    bool pass = false;
};

/// Lints the network's effective upsampling operator: the stored kernel
/// composed with whatever correction the configuration applies (post filter,
/// learned-quotient construction, or none).
LintReport lint_upsampler(const NetworkConfig& cfg, const SRNetWeights& w, double tol);

/// Lints bare per-channel deconvolution kernels ((C,K) or (C,Kh,Kw)) with no
/// correction, as stored in a raw tensor file.
LintReport lint_raw_kernels(const Tensor& kernels, int factor, double tol);

struct LintOptions {
    std::string weights_path;  // checkpoint, or raw CKF1 tensor with --factor
    std::optional<int> factor;
    double tol = 1e-9;
    std::string out = "lint_report.json";
    bool print_json = false;
};
int cmd_lint(const LintOptions& opt);

struct AnalyzeOptions {
    std::string weights_path;  // checkpoint; or
    std::string config_path;   // config JSON, network initialized from seed
    std::optional<std::uint64_t> seed;
    int input_size = 0;  // 0: smallest size the analysis margin allows
    double tol = 1e-9;
    double step_scale = 1.0;
    std::string out = "analyze_report.json";
    std::string heatmap;  // optional PNG of the step-response checkerboard map
    bool print_json = false;
};
int cmd_analyze(const AnalyzeOptions& opt);

struct TrainOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;  // overrides the config's network seed
};
int cmd_train(const TrainOptions& opt);

struct SrOptions {
    std::string weights_path;
    std::string input_path;
    std::string out = "sr_out.png";
    std::string reference_path;  // optional: print PSNR against this image
};
int cmd_sr(const SrOptions& opt);

struct BenchOptions {
    int factor = 4;
    int repeats = 3;
    std::vector<std::pair<int, int>> sizes;  // (height, width); empty: defaults
    std::string out = "bench.csv";
    int threads = 1;
};
int cmd_bench(const BenchOptions& opt);

/// Parses "HxW[,HxW...]" into (height, width) pairs.
std::vector<std::pair<int, int>> parse_sizes(const std::string& spec);

}  // namespace ckfree
