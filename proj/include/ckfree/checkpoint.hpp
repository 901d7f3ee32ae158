// Copyright 2026 the checkerfree authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "json.hpp"

#include "ckfree/network.hpp"
#include "ckfree/training.hpp"

namespace ckfree {

/// JSON names for the enums ("deconv", "subpixel", "resize_conv"; "none",
/// "post_h0", "inside_h0"). Unknown names throw std::invalid_argument.
UpsamplerKind upsampler_kind_from_name(const std::string& name);
Correction correction_from_name(const std::string& name);

/// Strict config (de)serialization: absent keys take the documented
/// defaults, unknown keys are errors.
nlohmann::json config_to_json(const NetworkConfig& cfg);
NetworkConfig config_from_json(const nlohmann::json& j);
nlohmann::json train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

/// Rejects any key of j outside `allowed`, naming the key and context.
void check_known_keys(const nlohmann::json& j, const std::vector<std::string>& allowed,
                      const std::string& context);

struct Checkpoint {
    NetworkConfig config;
    SRNetWeights weights;
};

/// Weight container: a binary file with the six parameter tensors in a fixed
/// order plus a `<path>.json` sidecar holding the network configuration.
/// Loading validates tensor names and shapes against the configuration.
void save_checkpoint(const std::string& path, const NetworkConfig& cfg, const SRNetWeights& w);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace ckfree
