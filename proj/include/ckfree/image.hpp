// Copyright 2026 the checkerfree authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "ckfree/tensor.hpp"

namespace ckfree {

/// Reads an 8-bit PNG or binary PGM (P5) into a (1, C, H, W) tensor of
/// doubles in [0, 1]. C is 1 for grayscale and 3 for color; palette images
/// expand to RGB, sub-byte depths expand to 8 bits, 16-bit channels are
/// reduced, and alpha is dropped. Failures throw std::runtime_error.
Tensor read_image(const std::string& path);

/// Writes a (1, 1, H, W) or (1, 3, H, W) tensor as an 8-bit image. The
/// format follows the file extension: .png (gray or RGB) or .pgm (gray
/// only). Values are clamped to [0, 1] and rounded to the nearest of the
/// 256 levels.
void write_image(const std::string& path, const Tensor& img);

/// ITU-R BT.601 luminance: Y = 0.299 R + 0.587 G + 0.114 B, applied to
/// (B, 3, H, W). Single-channel input passes through as a copy.
Tensor to_luminance(const Tensor& img);

}  // namespace ckfree
