// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sketchguide {

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws ContractViolation on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace sketchguide
