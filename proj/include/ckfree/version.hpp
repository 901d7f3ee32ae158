// Copyright 2026 the checkerfree authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace ckfree {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ckfree
