// Copyright 2026 the checkerfree authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ckfree/tensor.hpp"
#include "ckfree/upsample.hpp"

namespace ckfree {

/// The three-layer SR network: conv(K1,N1) + ReLU, conv(K2,N2) + ReLU, then
/// one of the upsampling layers, optionally followed by the hold-kernel
/// post-filter and a constant output gain.
struct NetworkConfig {
    int in_channels = 1;  // luminance input
    int k1 = 5, n1 = 64;
    int k2 = 3, n2 = 32;
    UpsamplerSpec upsampler;
    // Applied after everything else. The post-training correction sets this
    // to 1/U per axis to cancel the hold kernel's DC gain.
    double output_scale = 1.0;
    std::uint64_t seed = 0;

    int factor() const { return upsampler.factor; }
    int dims() const { return upsampler.dims; }
    /// Total receptive field of one output sample, measured in output
    /// samples (used to size analysis margins).
    int receptive_field_out() const;
    void validate() const;
};

/// Convenience constructors for the experiment table rows. K3 defaults to 9
/// for deconvolution / resize convolution and 3 for sub-pixel layers.
NetworkConfig make_config(UpsamplerKind kind, Correction correction, int U, int dims = 2);

struct SRNetWeights {
    Tensor w1, b1;  // (N1, Cin, K1, K1) / (N1), and the 1-D analogues
    Tensor w2, b2;
    UpsamplerWeights up;
};

/// Mutable view of every learnable parameter, in a fixed order. Gradients
/// and optimizer state use the same ordering.
struct ParamRef {
    std::string name;
    std::vector<double>* values;
};
std::vector<ParamRef> parameter_refs(SRNetWeights& w);

struct SRNetGrads {
    Tensor w1, b1, w2, b2;
    Tensor up_kernel;
    std::vector<double> up_bias;
};
std::vector<ParamRef> parameter_refs(SRNetGrads& g);

/// He-style initialization: zero biases, zero-mean normal kernels with
/// variance 2 / fan-in. Deterministic for a fixed seed.
SRNetWeights init_he(const NetworkConfig& cfg, std::uint64_t seed);

struct ForwardCache {
    Tensor x;
    Tensor z1, a1;  // conv1 pre-/post-activation
    Tensor z2, a2;
    Tensor up_out;  // upsampler output, before any correction
    Tensor y;       // final network output
};

Tensor forward(const NetworkConfig& cfg, const SRNetWeights& w, const Tensor& x);
ForwardCache forward_cached(const NetworkConfig& cfg, const SRNetWeights& w, const Tensor& x);
SRNetGrads backward(const NetworkConfig& cfg, const SRNetWeights& w, const ForwardCache& cache,
                    const Tensor& grad_y);

}  // namespace ckfree
