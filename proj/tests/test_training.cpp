// Copyright 2026 the checkerfree authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <limits>
#include <vector>

#include "ckfree/analysis.hpp"
#include "ckfree/network.hpp"
#include "ckfree/training.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace ckfree;

namespace {

// Small 2-D network that trains in well under a second.
NetworkConfig tiny_config(UpsamplerKind kind, Correction corr, int U) {
    NetworkConfig cfg = make_config(kind, corr, U);
    cfg.k1 = 3;
    cfg.n1 = 4;
    cfg.k2 = 3;
    cfg.n2 = 3;
    cfg.upsampler.in_channels = cfg.n2;
    return cfg;
}

void expect_bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CAPTURE(i);
        CHECK(a[i] == b[i]);
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Bicubic downscaling

TEST_CASE("bicubic downscaling maps constants to the same constant") {
    const Tensor img = Tensor::full({1, 1, 12, 8}, 0.37);
    const Tensor out = bicubic_downscale(img, 4);
    REQUIRE(out.shape() == std::vector<std::size_t>{1, 1, 3, 2});
    for (std::size_t i = 0; i < out.size(); ++i)
        CHECK(out[i] == doctest::Approx(0.37).epsilon(1e-12));
}

TEST_CASE("bicubic downscaling by 1 is the identity") {
    auto rng = testutil::make_rng(7);
    const Tensor img = testutil::random_tensor(rng, {1, 1, 5, 6});
    const Tensor out = bicubic_downscale(img, 1);
    REQUIRE(out.same_shape(img));
    for (std::size_t i = 0; i < img.size(); ++i) CHECK(out[i] == img[i]);
}

TEST_CASE("bicubic downscaling reproduces linear ramps away from the borders") {
    // Output o samples the ramp at input coordinate U*o + (U-1)/2; cubic
    // interpolation is exact on affine signals until border clamping bites.
    const int U = 4;
    Tensor row({1, 1, 64});
    for (std::size_t x = 0; x < 64; ++x) row[x] = 0.01 * static_cast<double>(x);
    const Tensor out = bicubic_downscale(row, U);
    REQUIRE(out.shape() == std::vector<std::size_t>{1, 1, 16});
    for (int o = 3; o < 13; ++o) {
        CAPTURE(o);
        CHECK(out[static_cast<std::size_t>(o)] ==
              doctest::Approx(0.01 * (U * o + (U - 1) / 2.0)).epsilon(1e-9));
    }
}

TEST_CASE("bicubic downscaling requires factor-aligned dimensions") {
    CHECK_THROWS_WITH_AS(bicubic_downscale(Tensor({1, 1, 6, 6}), 4),
                         doctest::Contains("divisible"), ShapeError);
    CHECK_THROWS_AS(bicubic_downscale(Tensor({1, 1, 8, 8}), 0), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Patch extraction

TEST_CASE("patch extraction pairs aligned crops with the full-image downscale") {
    auto rng = testutil::make_rng(11);
    const Tensor img = testutil::random_tensor(rng, {1, 1, 72, 144}, 0.0, 1.0);
    const SRDataset set = extract_patches(img, 4, 72, 72);
    REQUIRE(set.size() == 2);
    CHECK(set.factor == 4);

    const Tensor lr_full = bicubic_downscale(img, 4);
    for (int p = 0; p < 2; ++p) {
        const std::size_t x0 = static_cast<std::size_t>(p) * 72;
        for (std::size_t y = 0; y < 72; ++y)
            for (std::size_t x = 0; x < 72; ++x)
                if (set.hr[p].at4(0, 0, y, x) != img.at4(0, 0, y, x0 + x)) {
                    CAPTURE(p);
                    REQUIRE(set.hr[p].at4(0, 0, y, x) == img.at4(0, 0, y, x0 + x));
                }
        for (std::size_t y = 0; y < 18; ++y)
            for (std::size_t x = 0; x < 18; ++x)
                if (set.lr[p].at4(0, 0, y, x) != lr_full.at4(0, 0, y, x0 / 4 + x)) {
                    CAPTURE(p);
                    REQUIRE(set.lr[p].at4(0, 0, y, x) == lr_full.at4(0, 0, y, x0 / 4 + x));
                }
    }
}

TEST_CASE("patch extraction skips images smaller than one patch") {
    const SRDataset set = extract_patches(Tensor({1, 1, 32, 32}), 4, 72, 72);
    CHECK(set.empty());
}

TEST_CASE("patch extraction validates its grid parameters") {
    const Tensor img({1, 1, 72, 72});
    CHECK_THROWS_AS(extract_patches(img, 4, 70, 72), std::invalid_argument);
    CHECK_THROWS_AS(extract_patches(img, 4, 72, 30), std::invalid_argument);
    CHECK_THROWS_AS(extract_patches(Tensor({1, 2, 72, 72}), 4, 72, 72), ShapeError);
}

TEST_CASE("dataset append concatenates and rejects mixed factors") {
    auto rng = testutil::make_rng(12);
    const Tensor img = testutil::random_tensor(rng, {1, 1, 72, 72}, 0.0, 1.0);
    SRDataset a = extract_patches(img, 4, 72, 72);
    a.append(extract_patches(img, 4, 36, 36));
    CHECK(a.size() == 5);  // 1 + 4
    SRDataset other = extract_patches(img, 2, 36, 36);
    CHECK_THROWS_WITH_AS(a.append(other), doctest::Contains("factors disagree"), ShapeError);
}

// ---------------------------------------------------------------------------
// Loss and optimizer

TEST_CASE("MSE loss value and gradient") {
    const Tensor target({1, 1, 2, 2}, {1.0, 2.0, 3.0, 4.0});
    SUBCASE("zero at the target") {
        const MseResult r = mse_loss(target, target);
        CHECK(r.value == 0.0);
        for (std::size_t i = 0; i < 4; ++i) CHECK(r.grad[i] == 0.0);
    }
    SUBCASE("constant offset") {
        Tensor pred = target;
        for (double& v : pred.vec()) v += 2.0;
        const MseResult r = mse_loss(pred, target);
        CHECK(r.value == doctest::Approx(2.0).epsilon(1e-15));  // 0.5 * mean(4)
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(r.grad[i] == doctest::Approx(0.5).epsilon(1e-15));  // 2 / 4
    }
    SUBCASE("shape mismatch") {
        CHECK_THROWS_AS(mse_loss(Tensor({1, 1, 2, 3}), target), ShapeError);
    }
}

namespace {

// Parameter/gradient blocks over plain vectors, for optimizer tests.
std::vector<ParamRef> refs_of(std::vector<std::vector<double>>& blocks) {
    std::vector<ParamRef> r;
    for (std::size_t i = 0; i < blocks.size(); ++i)
        r.push_back({"block" + std::to_string(i), &blocks[i]});
    return r;
}

}  // namespace

TEST_CASE("Adam leaves parameters untouched under zero gradients") {
    std::vector<std::vector<double>> p{{1.0, -2.0}, {0.5}};
    std::vector<std::vector<double>> g{{0.0, 0.0}, {0.0}};
    const auto before = p;
    AdamState state;
    TrainConfig cfg;
    for (long t = 1; t <= 3; ++t) adam_step(refs_of(p), refs_of(g), state, t, cfg);
    expect_bitwise_equal(p[0], before[0]);
    expect_bitwise_equal(p[1], before[1]);
}

TEST_CASE("the first Adam step moves by about the learning rate against the gradient") {
    std::vector<std::vector<double>> p{{1.0, 1.0}};
    std::vector<std::vector<double>> g{{0.37, -5.2}};
    AdamState state;
    TrainConfig cfg;
    cfg.learning_rate = 1e-3;
    adam_step(refs_of(p), refs_of(g), state, 1, cfg);
    // Bias correction makes mhat = g and vhat = g^2, so the step is
    // -lr * sign(g) up to the epsilon regularizer.
    CHECK(p[0][0] == doctest::Approx(1.0 - 1e-3).epsilon(1e-6));
    CHECK(p[0][1] == doctest::Approx(1.0 + 1e-3).epsilon(1e-6));
}

TEST_CASE("Adam matches the textbook recurrence over several steps") {
    TrainConfig cfg;
    cfg.learning_rate = 0.01;
    const std::vector<double> grads{0.3, -0.7, 0.05, 0.4};  // one scalar per step

    std::vector<std::vector<double>> p{{2.0}};
    AdamState state;
    double expected = 2.0, m = 0.0, v = 0.0;
    for (long t = 1; t <= static_cast<long>(grads.size()); ++t) {
        const double g = grads[static_cast<std::size_t>(t - 1)];
        std::vector<std::vector<double>> gb{{g}};
        adam_step(refs_of(p), refs_of(gb), state, t, cfg);

        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
        const double mhat = m / (1.0 - std::pow(cfg.beta1, static_cast<double>(t)));
        const double vhat = v / (1.0 - std::pow(cfg.beta2, static_cast<double>(t)));
        expected -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
        CAPTURE(t);
        CHECK(p[0][0] == doctest::Approx(expected).epsilon(1e-15));
    }
}

TEST_CASE("adam_step validates its inputs") {
    std::vector<std::vector<double>> p{{1.0}};
    std::vector<std::vector<double>> g{{0.1}};
    AdamState state;
    TrainConfig cfg;
    CHECK_THROWS_AS(adam_step(refs_of(p), refs_of(g), state, 0, cfg), std::invalid_argument);
    adam_step(refs_of(p), refs_of(g), state, 1, cfg);
    std::vector<std::vector<double>> wrong{{0.1, 0.2}};
    CHECK_THROWS_AS(adam_step(refs_of(p), refs_of(wrong), state, 2, cfg), ShapeError);
}

// ---------------------------------------------------------------------------
// Training loop

namespace {

SRDataset one_patch_dataset(int U, int hr_size) {
    const Tensor img = make_synthetic_image(3, hr_size, hr_size);
    return extract_patches(img, U, hr_size, hr_size);
}

}  // namespace

TEST_CASE("training overfits a single patch") {
    NetworkConfig cfg = tiny_config(UpsamplerKind::deconv, Correction::post_h0, 2);
    cfg.seed = 51;
    TrainConfig tc;
    tc.iterations = 400;
    tc.learning_rate = 2e-3;
    tc.batch_size = 1;
    const TrainResult r = train(cfg, tc, one_patch_dataset(2, 24));
    REQUIRE(r.loss_history.size() == 400);
    CHECK(r.loss_history.back() < 0.1 * r.loss_history.front());
}

TEST_CASE("training is deterministic for a fixed seed") {
    NetworkConfig cfg = tiny_config(UpsamplerKind::subpixel, Correction::none, 2);
    cfg.seed = 52;
    TrainConfig tc;
    tc.iterations = 40;
    tc.batch_size = 3;  // wraps around the 1-patch dataset inside each batch
    const SRDataset data = one_patch_dataset(2, 24);
    const TrainResult a = train(cfg, tc, data);
    const TrainResult b = train(cfg, tc, data);
    expect_bitwise_equal(a.loss_history, b.loss_history);
    expect_bitwise_equal(a.weights.up.kernel.vec(), b.weights.up.kernel.vec());
    expect_bitwise_equal(a.weights.w1.vec(), b.weights.w1.vec());
}

TEST_CASE("a corrected network stays artifact-free through training") {
    NetworkConfig cfg = tiny_config(UpsamplerKind::deconv, Correction::post_h0, 4);
    cfg.seed = 53;
    TrainConfig tc;
    tc.iterations = 120;
    tc.learning_rate = 1e-3;
    const TrainResult r = train(cfg, tc, one_patch_dataset(4, 32));
    const StepResponseReport rep =
        network_step_report(cfg, r.weights, min_step_input_size(cfg));
    CHECK(rep.score <= 1e-9);
}

TEST_CASE("training aborts with a clear error when the loss blows up") {
    NetworkConfig cfg = tiny_config(UpsamplerKind::deconv, Correction::none, 2);
    cfg.seed = 54;
    TrainConfig tc;
    tc.iterations = 50;
    // Adam steps are bounded by the learning rate, so the rate itself has to
    // push the parameters far enough that a cubic blow-up overflows a double.
    tc.learning_rate = 1e120;
    CHECK_THROWS_WITH_AS(train(cfg, tc, one_patch_dataset(2, 24)),
                         doctest::Contains("diverged"), std::runtime_error);
}

TEST_CASE("train validates dataset pairing and factor") {
    NetworkConfig cfg = tiny_config(UpsamplerKind::deconv, Correction::none, 2);
    TrainConfig tc;
    CHECK_THROWS_WITH_AS(train(cfg, tc, SRDataset{}), doctest::Contains("empty"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(train(cfg, tc, one_patch_dataset(4, 32)),
                         doctest::Contains("factor"), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// PSNR

TEST_CASE("PSNR frozen values") {
    const Tensor a = Tensor::full({1, 1, 4, 4}, 0.5);
    CHECK(psnr(a, a, 1.0) == std::numeric_limits<double>::infinity());

    Tensor b = a;
    for (double& v : b.vec()) v += 1.0 / 255.0;
    CHECK(psnr(a, b, 1.0) == doctest::Approx(48.130803608679104).epsilon(1e-12));

    Tensor c = a;
    for (double& v : c.vec()) v += 2.0;
    CHECK(psnr(a, c, 1.0) == doctest::Approx(-6.020599913279624).epsilon(1e-12));

    CHECK_THROWS_AS(psnr(a, Tensor({1, 1, 2, 2}), 1.0), ShapeError);
    CHECK_THROWS_AS(psnr(a, a, 0.0), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Approach A (post-hoc correction of a trained network)

TEST_CASE("approach A rewrites the config to a scaled post filter") {
    const NetworkConfig cfg = make_config(UpsamplerKind::deconv, Correction::none, 4);
    const NetworkConfig a = apply_approach_a(cfg);
    CHECK(a.upsampler.correction == Correction::post_h0);
    CHECK(a.output_scale == doctest::Approx(1.0 / 16.0).epsilon(1e-15));
    CHECK(a.upsampler.kind == cfg.upsampler.kind);

    const NetworkConfig one_d = apply_approach_a(
        make_config(UpsamplerKind::subpixel, Correction::none, 3, 1));
    CHECK(one_d.output_scale == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("approach A removes the artifact and preserves the mean level") {
    for (UpsamplerKind kind : {UpsamplerKind::deconv, UpsamplerKind::subpixel}) {
        CAPTURE(to_string(kind));
        NetworkConfig cfg = tiny_config(kind, Correction::none, 4);
        cfg.seed = 55;
        const SRNetWeights w = init_he(cfg, cfg.seed);
        const NetworkConfig corrected = apply_approach_a(cfg);

        // The appended post filter widens the analysis margin, so size the
        // step input for the corrected network.
        const int n = min_step_input_size(corrected);
        const StepResponseReport before = network_step_report(cfg, w, n);
        const StepResponseReport after = network_step_report(corrected, w, n);
        CHECK(after.score <= 1e-9);

        // The post filter plus 1/U^2 gain averages the uncorrected phases, so
        // the steady-state level is the uncorrected phase mean.
        double mean = 0.0;
        for (double v : before.phase_values) mean += v;
        mean /= static_cast<double>(before.phase_values.size());
        for (double v : after.phase_values) {
            CHECK(v == doctest::Approx(mean).epsilon(1e-9));
        }
    }
}

TEST_CASE("approach A rejects resize convolution and flags double application") {
    CHECK_THROWS_WITH_AS(
        apply_approach_a(make_config(UpsamplerKind::resize_conv, Correction::none, 4)),
        doctest::Contains("nothing to correct"), std::invalid_argument);

    const NetworkConfig once =
        apply_approach_a(make_config(UpsamplerKind::deconv, Correction::none, 4));
    const NetworkConfig twice = apply_approach_a(once);  // warns; gain-only change
    CHECK(twice.upsampler.correction == Correction::post_h0);
    CHECK(twice.output_scale == doctest::Approx(1.0 / 256.0).epsilon(1e-15));
}

// ---------------------------------------------------------------------------
// Synthetic images

TEST_CASE("synthetic images are deterministic, in range, and distinct") {
    const Tensor a = make_synthetic_image(0, 48, 64);
    const Tensor b = make_synthetic_image(0, 48, 64);
    REQUIRE(a.shape() == std::vector<std::size_t>{1, 1, 48, 64});
    for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i] == b[i]);
    CHECK(a.min() >= 0.02 - 1e-12);
    CHECK(a.max() <= 0.98 + 1e-12);
    CHECK(a.max() - a.min() > 0.1);  // not a constant image

    const Tensor c = make_synthetic_image(1, 48, 64);
    double diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - c[i]));
    CHECK(diff > 0.01);
}
