// Copyright 2026 the checkerfree authors
// SPDX-License-Identifier: Apache-2.0

#include "ckfree/cli_ops.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ckfree/analysis.hpp"
#include "ckfree/conv.hpp"
#include "ckfree/image.hpp"
#include "ckfree/training.hpp"
#include "ckfree/version.hpp"

namespace ckfree {

namespace {

namespace fs = std::filesystem;
using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

// ---------------------------------------------------------------------------
// Run manifests

// The manifest sits next to the primary output: foo.csv -> foo.manifest.json.
std::string manifest_path_for(const std::string& primary_out) {
    static const char* kStrip[] = {".json", ".png", ".pgm", ".csv", ".ckpt"};
    std::string base = primary_out;
    for (const char* ext : kStrip) {
        const std::size_t n = std::string(ext).size();
        if (base.size() > n && base.compare(base.size() - n, n, ext) == 0) {
            base.resize(base.size() - n);
            break;
        }
    }
    return base + ".manifest.json";
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_manifest(const std::string& command, const std::string& primary_out,
                    const nlohmann::json& config, std::uint64_t seed,
                    std::vector<std::string> outputs, double wall_seconds,
                    const nlohmann::json& extra = nlohmann::json()) {
    nlohmann::json m{{"command", command}, {"version", kVersion},       {"seed", seed},
                     {"config", config},  {"outputs", std::move(outputs)},
                     {"wall_seconds", wall_seconds}};
    if (extra.is_object())
        for (const auto& item : extra.items()) m[item.key()] = item.value();
    write_json_file(manifest_path_for(primary_out), m);
}

// ---------------------------------------------------------------------------
// Config-file plumbing

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

int json_int_or(const nlohmann::json& j, const std::string& key, int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number_integer())
        throw std::invalid_argument("config: key '" + key + "' must be an integer");
    return j.at(key).get<int>();
}

std::string json_string_or(const nlohmann::json& j, const std::string& key,
                           std::string fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_string())
        throw std::invalid_argument("config: key '" + key + "' must be a string");
    return j.at(key).get<std::string>();
}

void require_schema_version(const nlohmann::json& top, const std::string& path) {
    if (!top.contains("schema_version") || !top.at("schema_version").is_number_integer() ||
        top.at("schema_version").get<int>() != 1)
        throw std::invalid_argument("config " + path + ": schema_version 1 is required");
}

// Accepts either a full run-config file ({"schema_version":1,"network":{...},...})
// or a bare network object.
NetworkConfig network_config_from_file(const std::string& path) {
    const nlohmann::json top = read_json_file(path);
    if (!top.is_object()) throw std::invalid_argument("config " + path + ": object expected");
    if (top.contains("network")) {
        check_known_keys(top, {"schema_version", "network", "train", "dataset", "outputs"},
                         "run config");
        require_schema_version(top, path);
        return config_from_json(top.at("network"));
    }
    return config_from_json(top);
}

// ---------------------------------------------------------------------------
// Lint

Filter kernel_row_as_filter(const Tensor& k, std::size_t c) {
    if (k.rank() == 2) {
        std::vector<double> taps(k.dim(1));
        for (std::size_t j = 0; j < taps.size(); ++j) taps[j] = k.at2(c, j);
        return Filter::line(std::move(taps));
    }
    const std::size_t kh = k.dim(1), kw = k.dim(2);
    std::vector<double> taps(kh * kw);
    for (std::size_t y = 0; y < kh; ++y)
        for (std::size_t x = 0; x < kw; ++x) taps[y * kw + x] = k.at3(c, y, x);
    return Filter::grid(static_cast<int>(kh), static_cast<int>(kw), std::move(taps));
}

// Rebuilds the single interpolation kernel a sub-pixel layer is equivalent
// to: h[U j + p] = g_p[j] along each axis.
Filter subpixel_channel_as_filter(const Tensor& k, std::size_t c, int U) {
    const std::size_t u = static_cast<std::size_t>(U);
    if (k.rank() == 3) {  // (U, C, L)
        const std::size_t L = k.dim(2);
        std::vector<double> taps(u * L, 0.0);
        for (std::size_t p = 0; p < u; ++p)
            for (std::size_t j = 0; j < L; ++j) taps[u * j + p] = k.at3(p, c, j);
        return Filter::line(std::move(taps));
    }
    const std::size_t lh = k.dim(2), lw = k.dim(3);  // (U^2, C, Lh, Lw)
    std::vector<double> taps(u * lh * u * lw, 0.0);
    for (std::size_t py = 0; py < u; ++py)
        for (std::size_t px = 0; px < u; ++px)
            for (std::size_t jy = 0; jy < lh; ++jy)
                for (std::size_t jx = 0; jx < lw; ++jx)
                    taps[(u * jy + py) * (u * lw) + (u * jx + px)] =
                        k.at4(py * u + px, c, jy, jx);
    return Filter::grid(static_cast<int>(u * lh), static_cast<int>(u * lw), std::move(taps));
}

// Per-channel effective interpolation kernels of the configured operator.
std::vector<Filter> effective_kernels(const NetworkConfig& cfg, const SRNetWeights& w) {
    const UpsamplerSpec& up = cfg.upsampler;
    const std::size_t C = static_cast<std::size_t>(up.in_channels);
    const Filter h0 = zero_order_hold_kernel(up.factor, up.dims);
    std::vector<Filter> eff;
    eff.reserve(C);
    for (std::size_t c = 0; c < C; ++c) {
        Filter base = up.kind == UpsamplerKind::subpixel
                          ? subpixel_channel_as_filter(w.up.kernel, c, up.factor)
                          : kernel_row_as_filter(w.up.kernel, c);
        // inside_h0 stores the quotient P; both corrections compose with H0.
        eff.push_back(up.correction == Correction::none ? std::move(base)
                                                        : convolve(base, h0));
    }
    return eff;
}

LintReport lint_kernels(std::vector<Filter> kernels, UpsamplerKind kind, Correction correction,
                        int factor, int dims, double tol) {
    LintReport r;
    r.kind = kind;
    r.correction = correction;
    r.factor = factor;
    r.dims = dims;
    r.tol = tol;
    if (factor == 1) {
        r.trivial = true;
        r.pass = true;
        r.note = "U = 1: no subsampling, so the condition imposes no constraint";
        return r;
    }
    r.pass = true;
    for (std::size_t c = 0; c < kernels.size(); ++c) {
        ChannelLint cl;
        cl.channel = static_cast<int>(c);
        cl.avoidance = satisfies_avoidance_condition(kernels[c], factor, tol);
        cl.factorization = factor_out_h0(kernels[c], factor, tol);
        r.pass = r.pass && cl.avoidance.pass;
        r.channels.push_back(std::move(cl));
    }
    return r;
}

nlohmann::json filter_to_json(const Filter& f) {
    return nlohmann::json{{"rows", f.rows}, {"cols", f.cols}, {"taps", f.taps}};
}

nlohmann::json lint_to_json(const LintReport& r) {
    nlohmann::json channels = nlohmann::json::array();
    for (const ChannelLint& cl : r.channels) {
        nlohmann::json c{{"channel", cl.channel},
                         {"phase_dc", cl.avoidance.phase_dc},
                         {"mean_dc", cl.avoidance.mean_dc},
                         {"max_deviation", cl.avoidance.max_deviation},
                         {"pass", cl.avoidance.pass},
                         {"h0_exact", cl.factorization.exact},
                         {"max_remainder", cl.factorization.max_remainder}};
        if (cl.factorization.exact) c["quotient"] = filter_to_json(cl.factorization.quotient);
        channels.push_back(std::move(c));
    }
    return nlohmann::json{{"kind", to_string(r.kind)},
                          {"correction", to_string(r.correction)},
                          {"factor", r.factor},
                          {"dims", r.dims},
                          {"tol", r.tol},
                          {"trivial", r.trivial},
                          {"note", r.note},
                          {"bias_spread", r.bias_spread},
                          {"bias_spread_counts", r.bias_spread_counts},
                          {"pass", r.pass},
                          {"channels", std::move(channels)}};
}

void print_lint_text(const LintReport& r) {
    std::cout << "lint: " << to_string(r.kind) << " + " << to_string(r.correction)
              << ", U = " << r.factor << ", " << r.dims << "-D, tol " << r.tol << "\n";
    if (!r.note.empty()) std::cout << "  note: " << r.note << "\n";
    for (const ChannelLint& cl : r.channels)
        std::cout << "  channel " << std::setw(3) << cl.channel << ": dc spread "
                  << std::scientific << std::setprecision(3) << cl.avoidance.max_deviation
                  << std::defaultfloat << "  H0-divisible: "
                  << (cl.factorization.exact ? "yes" : "no ")
                  << (cl.avoidance.pass ? "  ok" : "  FAIL") << "\n";
    if (r.kind == UpsamplerKind::subpixel)
        std::cout << "  per-phase bias spread " << std::scientific << std::setprecision(3)
                  << r.bias_spread << std::defaultfloat
                  << (r.bias_spread_counts ? " (counts toward verdict)" : " (informational)")
                  << "\n";
    std::cout << "verdict: " << (r.pass ? "PASS" : "FAIL") << "\n";
}

// ---------------------------------------------------------------------------
// Analyze helpers

nlohmann::json step_report_to_json(const StepResponseReport& r, double tol, bool pass) {
    return nlohmann::json{{"factor", r.factor},
                          {"dims", r.dims},
                          {"input_size", r.input_size},
                          {"margin", r.margin},
                          {"phase_values", r.phase_values},
                          {"phase_stddev", r.phase_stddev},
                          {"score", r.score},
                          {"prediction_available", r.prediction_available},
                          {"predicted", r.predicted},
                          {"max_prediction_error", r.max_prediction_error},
                          {"channel_steady", r.channel_steady},
                          {"all_channels_positive", r.all_channels_positive},
                          {"tolerance_used", r.tolerance_used},
                          {"tol", tol},
                          {"pass", pass}};
}

Tensor clamp01(Tensor t) {
    for (double& v : t.vec()) v = std::min(1.0, std::max(0.0, v));
    return t;
}

}  // namespace

// ---------------------------------------------------------------------------
// lint

LintReport lint_upsampler(const NetworkConfig& cfg, const SRNetWeights& w, double tol) {
    cfg.validate();
    const UpsamplerSpec& up = cfg.upsampler;
    if (up.kind == UpsamplerKind::resize_conv) {
        LintReport r;
        r.kind = up.kind;
        r.correction = up.correction;
        r.factor = up.factor;
        r.dims = up.dims;
        r.tol = tol;
        r.trivial = true;
        r.pass = true;
        r.note = "resize convolution is artifact-free by construction; nothing to lint";
        return r;
    }
    LintReport r = lint_kernels(effective_kernels(cfg, w), up.kind, up.correction, up.factor,
                                up.dims, tol);
    if (up.kind == UpsamplerKind::subpixel && !w.up.bias.empty()) {
        double mean = 0.0;
        for (double b : w.up.bias) mean += b;
        mean /= static_cast<double>(w.up.bias.size());
        for (double b : w.up.bias) r.bias_spread = std::max(r.bias_spread, std::abs(b - mean));
        // A post filter averages one full period, so every output sees the
        // same bias total; without one the per-phase biases must agree.
        r.bias_spread_counts = up.correction == Correction::none && up.factor > 1;
        if (r.bias_spread_counts && r.bias_spread > tol) {
            r.pass = false;
            r.note = "per-phase biases differ; a constant offset per phase is itself a "
                     "checkerboard pattern";
        }
    }
    return r;
}

LintReport lint_raw_kernels(const Tensor& kernels, int factor, double tol) {
    if (factor < 1) throw std::invalid_argument("lint: factor must be >= 1");
    if (kernels.rank() != 2 && kernels.rank() != 3)
        throw ShapeError("lint: raw kernel tensor must be (C,K) or (C,Kh,Kw), got " +
                         shape_to_string(kernels.shape()));
    std::vector<Filter> eff;
    for (std::size_t c = 0; c < kernels.dim(0); ++c)
        eff.push_back(kernel_row_as_filter(kernels, c));
    return lint_kernels(std::move(eff), UpsamplerKind::deconv, Correction::none, factor,
                        kernels.rank() == 2 ? 1 : 2, tol);
}

int cmd_lint(const LintOptions& opt) {
    const auto t0 = clock_type::now();
    LintReport report;
    nlohmann::json config_snapshot{{"weights", opt.weights_path}, {"tol", opt.tol}};
    if (!fs::exists(opt.weights_path))
        throw std::runtime_error("lint: cannot open " + opt.weights_path);
    if (fs::exists(opt.weights_path + ".json")) {
        const Checkpoint ck = load_checkpoint(opt.weights_path);
        if (opt.factor && *opt.factor != ck.config.upsampler.factor)
            throw std::invalid_argument(
                "lint: --factor " + std::to_string(*opt.factor) +
                " contradicts the checkpoint's factor " +
                std::to_string(ck.config.upsampler.factor));
        report = lint_upsampler(ck.config, ck.weights, opt.tol);
        config_snapshot["network"] = config_to_json(ck.config);
    } else {
        if (!opt.factor)
            throw std::invalid_argument(
                "lint: raw kernel tensors carry no configuration; pass --factor");
        report = lint_raw_kernels(load_tensor(opt.weights_path), *opt.factor, opt.tol);
        config_snapshot["factor"] = *opt.factor;
    }

    const nlohmann::json rj = lint_to_json(report);
    write_json_file(opt.out, rj);
    if (opt.print_json)
        std::cout << rj.dump(2) << "\n";
    else
        print_lint_text(report);
    write_manifest("lint", opt.out, config_snapshot, 0, {opt.out}, seconds_since(t0));
    return report.pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// analyze

int cmd_analyze(const AnalyzeOptions& opt) {
    const auto t0 = clock_type::now();
    if (opt.weights_path.empty() == opt.config_path.empty())
        throw std::invalid_argument("analyze: pass exactly one of --weights or --config");

    NetworkConfig cfg;
    SRNetWeights w;
    if (!opt.weights_path.empty()) {
        Checkpoint ck = load_checkpoint(opt.weights_path);
        cfg = ck.config;
        w = std::move(ck.weights);
        if (opt.seed)
            throw std::invalid_argument("analyze: --seed only applies with --config");
    } else {
        cfg = network_config_from_file(opt.config_path);
        if (opt.seed) cfg.seed = *opt.seed;
        w = init_he(cfg, cfg.seed);
    }

    const int min_n = min_step_input_size(cfg);
    const int n = opt.input_size > 0 ? opt.input_size : min_n;
    if (n < min_n)
        throw std::invalid_argument("analyze: input size " + std::to_string(n) +
                                    " is smaller than this network's analysis window; need at "
                                    "least " +
                                    std::to_string(min_n));

    const StepResponseReport report = network_step_report(cfg, w, n, opt.step_scale);
    const bool pass = report.score <= opt.tol;

    std::vector<std::string> outputs{opt.out};
    write_json_file(opt.out, step_report_to_json(report, opt.tol, pass));
    if (!opt.heatmap.empty()) {
        const Tensor y = forward(cfg, w, unit_step(n, cfg.upsampler.dims, opt.step_scale));
        Tensor map = checkerboard_map(y, cfg.upsampler.factor);
        const double peak = map.max();
        if (peak > 0.0) map.scale(1.0 / peak);
        if (map.rank() == 3) map = map.reshaped({1, 1, 1, map.dim(2)});
        write_image(opt.heatmap, map);
        outputs.push_back(opt.heatmap);
    }

    if (opt.print_json) {
        std::cout << step_report_to_json(report, opt.tol, pass).dump(2) << "\n";
    } else {
        std::cout << "step response: input " << n << (cfg.upsampler.dims == 2 ? "x" : "")
                  << (cfg.upsampler.dims == 2 ? std::to_string(n) : std::string())
                  << ", margin " << report.margin << ", U = " << report.factor << "\n"
                  << std::scientific << std::setprecision(4) << "checkerboard score "
                  << report.score << " (tol " << opt.tol << "): " << (pass ? "PASS" : "FAIL")
                  << "\n";
        if (report.prediction_available)
            std::cout << "steady-state prediction max error " << report.max_prediction_error
                      << (report.all_channels_positive ? ""
                                                       : " (some channels pinned at zero)")
                      << "\n";
        std::cout << std::defaultfloat;
    }

    nlohmann::json config_snapshot{{"network", config_to_json(cfg)},
                                   {"input_size", n},
                                   {"tol", opt.tol},
                                   {"step_scale", opt.step_scale}};
    write_manifest("analyze", opt.out, config_snapshot, cfg.seed, outputs, seconds_since(t0));
    return pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// train

int cmd_train(const TrainOptions& opt) {
    const auto t0 = clock_type::now();
    const nlohmann::json top = read_json_file(opt.config_path);
    check_known_keys(top, {"schema_version", "network", "train", "dataset", "outputs"},
                     "train config");
    require_schema_version(top, opt.config_path);
    if (!top.contains("network"))
        throw std::invalid_argument("train config: a 'network' section is required");
    if (!top.contains("dataset"))
        throw std::invalid_argument("train config: a 'dataset' section is required");

    NetworkConfig net = config_from_json(top.at("network"));
    if (opt.seed) net.seed = *opt.seed;
    TrainConfig tc = top.contains("train") ? train_config_from_json(top.at("train"))
                                           : TrainConfig{};
    tc.validate();

    const nlohmann::json ds = top.at("dataset");
    check_known_keys(ds, {"hr_dir", "synthetic_images", "synthetic_size"}, "dataset");
    const int U = net.upsampler.factor;
    SRDataset data;
    data.factor = U;
    if (ds.contains("hr_dir") && ds.contains("synthetic_images"))
        throw std::invalid_argument("dataset: choose hr_dir or synthetic_images, not both");
    if (ds.contains("hr_dir")) {
        const std::string dir = json_string_or(ds, "hr_dir", "");
        if (!fs::is_directory(dir))
            throw std::runtime_error("train: hr_dir is not a directory: " + dir);
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir)) {
            const std::string ext = entry.path().extension().string();
            if (entry.is_regular_file() && (ext == ".png" || ext == ".pgm"))
                files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const fs::path& p : files) {
            Tensor y = to_luminance(read_image(p.string()));
            // Crop to factor-aligned dimensions so the bicubic pairing is exact.
            const std::size_t h = y.dim(2) - y.dim(2) % U, wpx = y.dim(3) - y.dim(3) % U;
            if (h != y.dim(2) || wpx != y.dim(3)) {
                Tensor cropped({1, 1, h, wpx});
                for (std::size_t r = 0; r < h; ++r)
                    for (std::size_t c = 0; c < wpx; ++c)
                        cropped.at4(0, 0, r, c) = y.at4(0, 0, r, c);
                y = std::move(cropped);
            }
            data.append(extract_patches(y, U, tc.hr_patch, tc.stride));
        }
    } else if (ds.contains("synthetic_images")) {
        const int count = json_int_or(ds, "synthetic_images", 0);
        const int size = json_int_or(ds, "synthetic_size", 96);
        if (count < 1) throw std::invalid_argument("dataset: synthetic_images must be >= 1");
        if (size < tc.hr_patch || size % U != 0)
            throw std::invalid_argument(
                "dataset: synthetic_size must be a factor-aligned size of at least one patch");
        for (int i = 0; i < count; ++i)
            data.append(extract_patches(make_synthetic_image(i, size, size), U, tc.hr_patch,
                                        tc.stride));
    } else {
        throw std::invalid_argument("dataset: needs hr_dir or synthetic_images");
    }
    if (data.empty()) throw std::runtime_error("train: dataset is empty (no usable patches)");

    const nlohmann::json outs = top.value("outputs", nlohmann::json::object());
    check_known_keys(outs, {"checkpoint", "loss_csv", "checkpoint_every"}, "outputs");
    const std::string ckpt_path = json_string_or(outs, "checkpoint", "model.ckpt");
    const std::string loss_path = json_string_or(outs, "loss_csv", "loss.csv");
    const int every = json_int_or(outs, "checkpoint_every", 0);

    std::function<void(int, const SRNetWeights&)> hook;
    if (every > 0)
        hook = [&](int iter, const SRNetWeights& snapshot) {
            save_checkpoint(ckpt_path + "." + std::to_string(iter), net, snapshot);
        };

    std::cout << "training " << to_string(net.upsampler.kind) << " + "
              << to_string(net.upsampler.correction) << " (U = " << U << ") on " << data.size()
              << " patches, " << tc.iterations << " iterations\n";
    const TrainResult result = train(net, tc, data, hook, every);
    save_checkpoint(ckpt_path, net, result.weights);

    std::ofstream csv(loss_path);
    if (!csv) throw std::runtime_error("cannot open for writing: " + loss_path);
    csv << "iteration,loss\n" << std::setprecision(17);
    for (std::size_t i = 0; i < result.loss_history.size(); ++i)
        csv << i + 1 << "," << result.loss_history[i] << "\n";

    std::cout << std::scientific << std::setprecision(4) << "final loss "
              << result.loss_history.back() << std::defaultfloat << "; checkpoint "
              << ckpt_path << "; losses " << loss_path << "\n";

    nlohmann::json config_snapshot{{"schema_version", 1},
                                   {"network", config_to_json(net)},
                                   {"train", train_config_to_json(tc)},
                                   {"dataset", ds},
                                   {"outputs",
                                    {{"checkpoint", ckpt_path},
                                     {"loss_csv", loss_path},
                                     {"checkpoint_every", every}}}};
    write_manifest("train", ckpt_path, config_snapshot, net.seed,
                   {ckpt_path, ckpt_path + ".json", loss_path}, seconds_since(t0));
    return 0;
}

// ---------------------------------------------------------------------------
// sr

int cmd_sr(const SrOptions& opt) {
    const auto t0 = clock_type::now();
    const Checkpoint ck = load_checkpoint(opt.weights_path);
    if (ck.config.upsampler.dims != 2)
        throw std::invalid_argument("sr: image inference needs a 2-D network");

    const Tensor x = to_luminance(read_image(opt.input_path));
    const Tensor y = clamp01(forward(ck.config, ck.weights, x));
    write_image(opt.out, y);

    nlohmann::json extra;
    if (!opt.reference_path.empty()) {
        const Tensor ref = to_luminance(read_image(opt.reference_path));
        if (!ref.same_shape(y))
            throw std::invalid_argument("sr: reference image is " +
                                        shape_to_string(ref.shape()) + " but the output is " +
                                        shape_to_string(y.shape()));
        const double db = psnr(y, ref, 1.0);
        std::cout << "PSNR vs " << opt.reference_path << ": " << std::fixed
                  << std::setprecision(4) << db << " dB\n"
                  << std::defaultfloat;
        extra = nlohmann::json{{"psnr_db", db}};
    }
    std::cout << "wrote " << opt.out << " (" << y.dim(3) << "x" << y.dim(2) << ")\n";

    nlohmann::json config_snapshot{{"network", config_to_json(ck.config)},
                                   {"weights", opt.weights_path},
                                   {"input", opt.input_path},
                                   {"reference", opt.reference_path}};
    write_manifest("sr", opt.out, config_snapshot, ck.config.seed, {opt.out},
                   seconds_since(t0), extra);
    return 0;
}

// ---------------------------------------------------------------------------
// bench

std::vector<std::pair<int, int>> parse_sizes(const std::string& spec) {
    std::vector<std::pair<int, int>> sizes;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        int h = 0, w = 0;
        char x = 0;
        std::stringstream is(item);
        if (!(is >> h >> x >> w) || x != 'x' || h < 1 || w < 1 || !(is >> std::ws).eof())
            throw std::invalid_argument("bench: bad size '" + item + "', expected HxW");
        sizes.emplace_back(h, w);
    }
    if (sizes.empty()) throw std::invalid_argument("bench: empty size list");
    return sizes;
}

int cmd_bench(const BenchOptions& opt) {
    const auto t0 = clock_type::now();
    if (opt.repeats < 3) throw std::invalid_argument("bench: repeats must be >= 3");
    if (opt.factor < 1) throw std::invalid_argument("bench: factor must be >= 1");
    set_blas_threads(opt.threads);

    std::vector<std::pair<int, int>> sizes = opt.sizes;
    if (sizes.empty()) sizes = {{69, 69}, {125, 90}, {128, 128}, {132, 164}, {180, 144}};

    struct Row {
        std::string name;
        NetworkConfig cfg;
    };
    const int U = opt.factor;
    std::vector<Row> rows{
        {"deconv", make_config(UpsamplerKind::deconv, Correction::none, U)},
        {"deconv_h0_a", apply_approach_a(make_config(UpsamplerKind::deconv, Correction::none, U))},
        {"deconv_h0_b", make_config(UpsamplerKind::deconv, Correction::post_h0, U)},
        {"deconv_h0_c", make_config(UpsamplerKind::deconv, Correction::inside_h0, U)},
        {"subpixel", make_config(UpsamplerKind::subpixel, Correction::none, U)},
        {"subpixel_h0", make_config(UpsamplerKind::subpixel, Correction::post_h0, U)},
        {"resize_conv", make_config(UpsamplerKind::resize_conv, Correction::none, U)},
    };

    std::ofstream csv(opt.out);
    if (!csv) throw std::runtime_error("cannot open for writing: " + opt.out);
    csv << "network,height,width,repeats,median_seconds,min_seconds,max_seconds\n"
        << std::setprecision(9);

    for (const auto& [h, wpx] : sizes) {
        // One deterministic input per size, shared across all networks.
        std::mt19937_64 rng(0xBE9C000000000000ULL ^ (static_cast<std::uint64_t>(h) << 20) ^
                            static_cast<std::uint64_t>(wpx));
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        Tensor x({1, 1, static_cast<std::size_t>(h), static_cast<std::size_t>(wpx)});
        for (double& v : x.vec()) v = uni(rng);

        // Repeats are interleaved across the networks rather than collected
        // back to back, so a transient slowdown (scheduler, thermal) lands on
        // every network instead of poisoning one row's whole sample. The
        // order is reshuffled every round: a fixed cyclic order would give
        // each network a fixed predecessor, and the cache state left behind
        // by a large predecessor (resize_conv in particular) measurably
        // taxes whichever network always follows it.
        std::vector<SRNetWeights> weights;
        weights.reserve(rows.size());
        std::vector<std::size_t> order;
        for (const Row& row : rows) {
            order.push_back(weights.size());
            weights.push_back(init_he(row.cfg, 7));
            forward(row.cfg, weights.back(), x);  // warm-up: page in buffers
        }
        std::mt19937_64 order_rng(0x0DDE500000000000ULL ^ static_cast<std::uint64_t>(h));
        std::vector<std::vector<double>> times(rows.size());
        for (int rep = 0; rep < opt.repeats; ++rep) {
            std::shuffle(order.begin(), order.end(), order_rng);
            for (std::size_t i : order) {
                const auto r0 = clock_type::now();
                forward(rows[i].cfg, weights[i], x);
                times[i].push_back(seconds_since(r0));
            }
        }
        for (std::size_t i = 0; i < rows.size(); ++i) {
            std::sort(times[i].begin(), times[i].end());
            const double median = times[i][times[i].size() / 2];
            csv << rows[i].name << "," << h << "," << wpx << "," << opt.repeats << "," << median
                << "," << times[i].front() << "," << times[i].back() << "\n";
            std::cout << std::left << std::setw(12) << rows[i].name << std::right << " " << h
                      << "x" << wpx << "  median " << std::fixed << std::setprecision(4) << median
                      << " s\n"
                      << std::defaultfloat;
        }
    }
    csv.flush();
    if (!csv) throw std::runtime_error("write failed: " + opt.out);

    nlohmann::json size_list = nlohmann::json::array();
    for (const auto& [h, wpx] : sizes) size_list.push_back({h, wpx});
    nlohmann::json networks = nlohmann::json::array();
    for (const Row& row : rows) networks.push_back(row.name);
    nlohmann::json config_snapshot{{"factor", opt.factor},
                                   {"repeats", opt.repeats},
                                   {"sizes", size_list},
                                   {"threads", opt.threads},
                                   {"networks", networks}};
    write_manifest("bench", opt.out, config_snapshot, 7, {opt.out}, seconds_since(t0));
    return 0;
}

}  // namespace ckfree
