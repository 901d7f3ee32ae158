// Copyright 2026 the checkerfree authors
// SPDX-License-Identifier: Apache-2.0

// checkerfree: lint, analyze, train, run, and benchmark CNN upsampling
// layers with respect to checkerboard artifacts.
//
// Exit codes: 0 pass/success, 1 analysis-failure verdict, 2 usage/IO error.

#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ckfree/cli_ops.hpp"
#include "ckfree/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"checkerboard-artifact toolkit for CNN upsampling layers"};
    app.set_version_flag("--version", ckfree::kVersion);
    app.require_subcommand(1);

    ckfree::LintOptions lint;
    CLI::App* cl = app.add_subcommand(
        "lint", "Check upsampling kernels against the equal-phase-DC condition");
    cl->add_option("weights", lint.weights_path, "Checkpoint, or raw (C,K)/(C,Kh,Kw) tensor")
        ->required();
    int lint_factor = 0;
    CLI::Option* lf = cl->add_option("--factor", lint_factor, "Upsampling factor (raw tensors)");
    cl->add_option("--tol", lint.tol, "DC-spread tolerance")->capture_default_str();
    cl->add_option("--out", lint.out, "Report JSON path")->capture_default_str();
    cl->add_flag("--json", lint.print_json, "Print the JSON report to stdout");

    ckfree::AnalyzeOptions analyze;
    CLI::App* ca = app.add_subcommand(
        "analyze", "Measure a network's step-response checkerboard score");
    ca->add_option("--weights", analyze.weights_path, "Checkpoint to analyze");
    ca->add_option("--config", analyze.config_path, "Config JSON (fresh init, see --seed)");
    std::uint64_t analyze_seed = 0;
    CLI::Option* as = ca->add_option("--seed", analyze_seed, "Init seed with --config");
    ca->add_option("--input-size", analyze.input_size, "Step-input size (0: minimum)");
    ca->add_option("--tol", analyze.tol, "Score tolerance for the verdict")->capture_default_str();
    ca->add_option("--step-scale", analyze.step_scale, "Step amplitude")->capture_default_str();
    ca->add_option("--out", analyze.out, "Report JSON path")->capture_default_str();
    ca->add_option("--heatmap", analyze.heatmap, "Write the checkerboard map as a PNG");
    ca->add_flag("--json", analyze.print_json, "Print the JSON report to stdout");

    ckfree::TrainOptions train;
    CLI::App* ct = app.add_subcommand("train", "Train a network from a run-config file");
    ct->add_option("--config", train.config_path, "Run config JSON")->required();
    std::uint64_t train_seed = 0;
    CLI::Option* ts = ct->add_option("--seed", train_seed, "Override the network seed");

    ckfree::SrOptions sr;
    CLI::App* cs = app.add_subcommand("sr", "Upscale an image with a trained checkpoint");
    cs->add_option("input", sr.input_path, "Input image (PNG or PGM)")->required();
    cs->add_option("--weights", sr.weights_path, "Checkpoint")->required();
    cs->add_option("--out", sr.out, "Output image path")->capture_default_str();
    cs->add_option("--ref", sr.reference_path, "Reference image for PSNR");

    ckfree::BenchOptions bench;
    CLI::App* cb = app.add_subcommand("bench", "Time forward passes of the layer variants");
    cb->add_option("--factor", bench.factor, "Upsampling factor")->capture_default_str();
    cb->add_option("--repeats", bench.repeats, "Timed repeats per cell (>= 3)")->capture_default_str();
    std::string bench_sizes;
    cb->add_option("--sizes", bench_sizes, "Input sizes, e.g. 69x69,125x90 (default: builtin)");
    cb->add_option("--out", bench.out, "Timing CSV path")->capture_default_str();
    cb->add_option("--threads", bench.threads, "BLAS worker threads")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*cl) {
            if (*lf) lint.factor = lint_factor;
            return ckfree::cmd_lint(lint);
        }
        if (*ca) {
            if (*as) analyze.seed = analyze_seed;
            return ckfree::cmd_analyze(analyze);
        }
        if (*ct) {
            if (*ts) train.seed = train_seed;
            return ckfree::cmd_train(train);
        }
        if (*cs) return ckfree::cmd_sr(sr);
        if (*cb) {
            if (!bench_sizes.empty()) bench.sizes = ckfree::parse_sizes(bench_sizes);
            return ckfree::cmd_bench(bench);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;  // unreachable: a subcommand is required
}
