// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sketchguide/image.hpp"

namespace sketchguide {

/// tokens × dim conditioning vectors.
struct PromptEmbedding {
    std::size_t tokens = 0;
    std::size_t dim = 0;
    std::vector<float> data;

    std::uint64_t digest() const;
    friend bool operator==(const PromptEmbedding&, const PromptEmbedding&) = default;
};

enum class BackendKind { Synthetic, Remote };

struct BackendDescriptor {
    BackendKind kind = BackendKind::Synthetic;
    std::size_t working_resolution = 512;
    std::size_t latent_downscale = Latent::kDownscale;
    std::vector<std::string> styles{"anime", "realistic"};

    bool has_style(const std::string& style) const;
    void validate() const;
};

const char* to_string(BackendKind kind);

/// A backend failed to answer (transport, remote error, bad response).
class BackendError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One item of a noise-prediction batch. The embedding is borrowed for the
/// duration of the call.
struct NoiseQuery {
    const Latent* latent = nullptr;
    int timestep = 0;
    const PromptEmbedding* embedding = nullptr;
};

/// The neural capabilities the pipeline needs. Implementations are stateless
/// after construction and callable from several threads at once.
class ModelBackend {
public:
    virtual ~ModelBackend() = default;

    virtual const BackendDescriptor& descriptor() const = 0;

    virtual PromptEmbedding encode_prompt(const std::string& text, const std::string& style) = 0;
    virtual Latent vae_encode(const RgbImage& image) = 0;
    virtual RgbImage vae_decode(const Latent& latent) = 0;
    /// One output per query, in order.
    virtual std::vector<Latent> predict_noise(std::span<const NoiseQuery> batch) = 0;
    /// Dark lines on a light ground, same dims as the input.
    virtual GrayImage extract_lines(const RgbImage& image) = 0;
};

}  // namespace sketchguide
