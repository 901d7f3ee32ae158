// Copyright 2026 the checkerfree authors
// SPDX-License-Identifier: Apache-2.0

#include "ckfree/network.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "ckfree/conv.hpp"

namespace ckfree {

namespace {

int ceil_div(int a, int b) { return (a + b - 1) / b; }

ConvParams same_for(int k, int dims) {
    return dims == 1 ? ConvParams::same(1, k) : ConvParams::same(k, k);
}

Tensor upsampler_run(const UpsamplerSpec& spec, const UpsamplerWeights& w, const Tensor& a2) {
    switch (spec.kind) {
        case UpsamplerKind::deconv:
            return spec.correction == Correction::inside_h0
                       ? approach_c_deconv_forward(a2, w, spec.factor)
                       : deconv_forward_general(a2, w, spec.factor);
        case UpsamplerKind::subpixel:
            return subpixel_forward(a2, w, spec.factor);
        case UpsamplerKind::resize_conv:
            return resize_conv_forward(a2, w, spec.factor);
    }
    throw std::logic_error("unreachable upsampler kind");
}

UpsampleGrads upsampler_grad(const UpsamplerSpec& spec, const UpsamplerWeights& w,
                             const Tensor& a2, const Tensor& go) {
    switch (spec.kind) {
        case UpsamplerKind::deconv:
            return spec.correction == Correction::inside_h0
                       ? approach_c_backward(a2, w, spec.factor, go)
                       : deconv_backward(a2, w, spec.factor, go);
        case UpsamplerKind::subpixel:
            return subpixel_backward(a2, w, spec.factor, go);
        case UpsamplerKind::resize_conv:
            return resize_conv_backward(a2, w, spec.factor, go);
    }
    throw std::logic_error("unreachable upsampler kind");
}

}  // namespace

int NetworkConfig::receptive_field_out() const {
    const int U = upsampler.factor;
    const int k3 = upsampler.kernel_size;
    int width_lr = k1 + k2 - 1;  // conv stack, in input samples
    int rf = 0;
    switch (upsampler.kind) {
        case UpsamplerKind::deconv:
            width_lr += ceil_div(k3, U) - 1;
            rf = U * width_lr;
            break;
        case UpsamplerKind::subpixel:
            width_lr += k3 - 1;  // per-phase kernels run on the coarse grid
            rf = U * width_lr;
            break;
        case UpsamplerKind::resize_conv:
            rf = U * width_lr + k3 - 1;
            break;
    }
    rf += U - 1;  // phase offset of the interleave
    if (upsampler.correction == Correction::post_h0) rf += U - 1;
    return rf;
}

void NetworkConfig::validate() const {
    if (in_channels < 1 || k1 < 1 || n1 < 1 || k2 < 1 || n2 < 1)
        throw std::invalid_argument("network: layer sizes must be positive");
    upsampler.validate();
    if (upsampler.in_channels != n2)
        throw std::invalid_argument("network: upsampler in_channels must equal N2");
    if (output_scale <= 0.0)
        throw std::invalid_argument("network: output_scale must be positive");
}

NetworkConfig make_config(UpsamplerKind kind, Correction correction, int U, int dims) {
    NetworkConfig cfg;
    cfg.upsampler.kind = kind;
    cfg.upsampler.correction = correction;
    cfg.upsampler.factor = U;
    cfg.upsampler.kernel_size = kind == UpsamplerKind::subpixel ? 3 : 9;
    cfg.upsampler.in_channels = cfg.n2;
    cfg.upsampler.dims = dims;
    cfg.validate();
    return cfg;
}

std::vector<ParamRef> parameter_refs(SRNetWeights& w) {
    return {{"conv1.kernel", &w.w1.vec()}, {"conv1.bias", &w.b1.vec()},
            {"conv2.kernel", &w.w2.vec()}, {"conv2.bias", &w.b2.vec()},
            {"up.kernel", &w.up.kernel.vec()}, {"up.bias", &w.up.bias}};
}

std::vector<ParamRef> parameter_refs(SRNetGrads& g) {
    return {{"conv1.kernel", &g.w1.vec()}, {"conv1.bias", &g.b1.vec()},
            {"conv2.kernel", &g.w2.vec()}, {"conv2.bias", &g.b2.vec()},
            {"up.kernel", &g.up_kernel.vec()}, {"up.bias", &g.up_bias}};
}

SRNetWeights init_he(const NetworkConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    std::mt19937_64 rng(seed);
    auto he_fill = [&rng](Tensor& t, int fan_in) {
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
    };

    const int dims = cfg.dims();
    const int U = cfg.upsampler.factor;
    const int k3 = cfg.upsampler.kernel_size;
    auto conv_shape = [dims](int out, int in, int k) {
        return dims == 1 ? std::vector<std::size_t>{static_cast<std::size_t>(out),
                                                    static_cast<std::size_t>(in),
                                                    static_cast<std::size_t>(k)}
                         : std::vector<std::size_t>{static_cast<std::size_t>(out),
                                                    static_cast<std::size_t>(in),
                                                    static_cast<std::size_t>(k),
                                                    static_cast<std::size_t>(k)};
    };
    const int spatial1 = dims == 1 ? cfg.k1 : cfg.k1 * cfg.k1;
    const int spatial2 = dims == 1 ? cfg.k2 : cfg.k2 * cfg.k2;

    SRNetWeights w;
    w.w1 = Tensor::zeros(conv_shape(cfg.n1, cfg.in_channels, cfg.k1));
    he_fill(w.w1, cfg.in_channels * spatial1);
    w.b1 = Tensor::zeros({static_cast<std::size_t>(cfg.n1)});
    w.w2 = Tensor::zeros(conv_shape(cfg.n2, cfg.n1, cfg.k2));
    he_fill(w.w2, cfg.n1 * spatial2);
    w.b2 = Tensor::zeros({static_cast<std::size_t>(cfg.n2)});

    switch (cfg.upsampler.kind) {
        case UpsamplerKind::deconv: {
            // inside_h0 learns the quotient kernel P of size K3 - U + 1; the
            // hold-kernel factor restores the full K3 support.
            const int k = cfg.upsampler.correction == Correction::inside_h0 ? k3 - U + 1 : k3;
            const int sp = dims == 1 ? k : k * k;
            w.up.kernel = dims == 1
                              ? Tensor::zeros({static_cast<std::size_t>(cfg.n2),
                                               static_cast<std::size_t>(k)})
                              : Tensor::zeros({static_cast<std::size_t>(cfg.n2),
                                               static_cast<std::size_t>(k),
                                               static_cast<std::size_t>(k)});
            he_fill(w.up.kernel, cfg.n2 * sp);
            w.up.bias = {0.0};
            break;
        }
        case UpsamplerKind::subpixel: {
            const int phases = dims == 1 ? U : U * U;
            const int sp = dims == 1 ? k3 : k3 * k3;
            w.up.kernel = dims == 1
                              ? Tensor::zeros({static_cast<std::size_t>(phases),
                                               static_cast<std::size_t>(cfg.n2),
                                               static_cast<std::size_t>(k3)})
                              : Tensor::zeros({static_cast<std::size_t>(phases),
                                               static_cast<std::size_t>(cfg.n2),
                                               static_cast<std::size_t>(k3),
                                               static_cast<std::size_t>(k3)});
            he_fill(w.up.kernel, cfg.n2 * sp);
            w.up.bias.assign(phases, 0.0);
            break;
        }
        case UpsamplerKind::resize_conv: {
            const int sp = dims == 1 ? k3 : k3 * k3;
            w.up.kernel = Tensor::zeros(conv_shape(1, cfg.n2, k3));
            he_fill(w.up.kernel, cfg.n2 * sp);
            w.up.bias = {0.0};
            break;
        }
    }
    return w;
}

Tensor forward(const NetworkConfig& cfg, const SRNetWeights& w, const Tensor& x) {
    Tensor a1 = relu(conv_forward(x, w.w1, w.b1.vec(), same_for(cfg.k1, cfg.dims())));
    Tensor a2 = relu(conv_forward(a1, w.w2, w.b2.vec(), same_for(cfg.k2, cfg.dims())));
    Tensor y = upsampler_run(cfg.upsampler, w.up, a2);
    if (cfg.upsampler.correction == Correction::post_h0) y = h0_postfilter(y, cfg.factor());
    if (cfg.output_scale != 1.0) y.scale(cfg.output_scale);
    return y;
}

ForwardCache forward_cached(const NetworkConfig& cfg, const SRNetWeights& w, const Tensor& x) {
    ForwardCache c;
    c.x = x;
    c.z1 = conv_forward(x, w.w1, w.b1.vec(), same_for(cfg.k1, cfg.dims()));
    c.a1 = relu(c.z1);
    c.z2 = conv_forward(c.a1, w.w2, w.b2.vec(), same_for(cfg.k2, cfg.dims()));
    c.a2 = relu(c.z2);
    c.up_out = upsampler_run(cfg.upsampler, w.up, c.a2);
    c.y = cfg.upsampler.correction == Correction::post_h0
              ? h0_postfilter(c.up_out, cfg.factor())
              : c.up_out;
    if (cfg.output_scale != 1.0) {
        Tensor scaled = c.y;
        scaled.scale(cfg.output_scale);
        c.y = scaled;
    }
    return c;
}

SRNetGrads backward(const NetworkConfig& cfg, const SRNetWeights& w, const ForwardCache& cache,
                    const Tensor& grad_y) {
    Tensor g = grad_y;
    if (cfg.output_scale != 1.0) g.scale(cfg.output_scale);
    if (cfg.upsampler.correction == Correction::post_h0)
        g = h0_postfilter_backward(g, cfg.factor());

    UpsampleGrads ug = upsampler_grad(cfg.upsampler, w.up, cache.a2, g);

    Tensor g2 = relu_backward(cache.z2, ug.x);
    ConvGrads c2 = conv_backward(cache.a1, w.w2, same_for(cfg.k2, cfg.dims()), g2);
    Tensor g1 = relu_backward(cache.z1, c2.x);
    ConvGrads c1 = conv_backward(cache.x, w.w1, same_for(cfg.k1, cfg.dims()), g1);

    SRNetGrads out;
    out.w1 = std::move(c1.w);
    out.b1 = std::move(c1.b);
    out.w2 = std::move(c2.w);
    out.b2 = std::move(c2.b);
    out.up_kernel = std::move(ug.kernel);
    out.up_bias = std::move(ug.bias);
    return out;
}

}  // namespace ckfree
