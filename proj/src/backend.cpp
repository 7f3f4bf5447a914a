// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

#include "sketchguide/backend.hpp"

#include <algorithm>

#include "sketchguide/random.hpp"

namespace sketchguide {

std::uint64_t PromptEmbedding::digest() const {
    std::uint64_t h = hash_combine(tokens, dim);
    return hash_bytes(std::as_bytes(std::span(data)), h);
}

bool BackendDescriptor::has_style(const std::string& style) const {
    return std::find(styles.begin(), styles.end(), style) != styles.end();
}

void BackendDescriptor::validate() const {
    require(latent_downscale > 0 && working_resolution > 0 && working_resolution % latent_downscale == 0,
            "BackendDescriptor: working_resolution must be divisible by latent_downscale");
    require(!styles.empty(), "BackendDescriptor: at least one style is required");
}

const char* to_string(BackendKind kind) {
    return kind == BackendKind::Synthetic ? "synthetic" : "remote";
}

}  // namespace sketchguide
