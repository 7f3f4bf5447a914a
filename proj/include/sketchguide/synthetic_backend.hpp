// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "sketchguide/backend.hpp"
#include "sketchguide/sketch_optimizer.hpp"

namespace sketchguide {

/// Deterministic stand-in for the neural stack. Every capability is a pure
/// function of its inputs and the backend seed.
///
/// Codec: the encoder averages 8×8 blocks per RGB channel and applies the
/// fixed map (r,g,b) → (2r, 2g, 2b, ⅔(r+g+b)); the decoder inverts it from
/// the first three channels and upsamples by repetition, so
/// decode(encode(x)) is exactly the blockwise mean of x.
///
/// Noise prediction is a smooth pseudo-random field seeded from a hash of
/// (latent content, timestep, embedding).
class SyntheticBackend final : public ModelBackend {
public:
    static constexpr std::size_t kEmbedTokens = 8;
    static constexpr std::size_t kEmbedDim = 32;

    explicit SyntheticBackend(std::uint64_t seed = 0, BackendDescriptor descriptor = {}, XdogParams xdog = {});

    const BackendDescriptor& descriptor() const override { return descriptor_; }

    PromptEmbedding encode_prompt(const std::string& text, const std::string& style) override;
    Latent vae_encode(const RgbImage& image) override;
    RgbImage vae_decode(const Latent& latent) override;
    std::vector<Latent> predict_noise(std::span<const NoiseQuery> batch) override;
    GrayImage extract_lines(const RgbImage& image) override;

    /// The field predict_noise returns for one query.
    Latent noise_field(const Latent& latent, int timestep, const PromptEmbedding& embedding) const;

private:
    std::uint64_t seed_;
    BackendDescriptor descriptor_;
    XdogParams xdog_;
};

}  // namespace sketchguide
