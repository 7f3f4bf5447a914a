// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

#include "sketchguide/synthetic_backend.hpp"

#include <cmath>
#include <numbers>

#include "sketchguide/imaging.hpp"
#include "sketchguide/kernels.hpp"
#include "sketchguide/random.hpp"

namespace sketchguide {

namespace {

// Sinusoid products per channel in the noise field.
constexpr int kFieldTerms = 3;

}  // namespace

SyntheticBackend::SyntheticBackend(std::uint64_t seed, BackendDescriptor descriptor, XdogParams xdog)
    : seed_(seed), descriptor_(std::move(descriptor)), xdog_(xdog) {
    descriptor_.kind = BackendKind::Synthetic;
    descriptor_.validate();
    xdog_.validate();
}

PromptEmbedding SyntheticBackend::encode_prompt(const std::string& text, const std::string& style) {
    require(descriptor_.has_style(style), "encode_prompt: unknown style");
    Rng rng(hash_combine(hash_combine(seed_, hash_string(text)), hash_string(style)));
    PromptEmbedding e{kEmbedTokens, kEmbedDim, std::vector<float>(kEmbedTokens * kEmbedDim)};
    for (float& v : e.data) v = static_cast<float>(rng.gaussian());
    return e;
}

Latent SyntheticBackend::vae_encode(const RgbImage& image) {
    Latent out = Latent::for_source(image.width(), image.height());
    const std::size_t plane = out.plane_size();
    std::vector<double> means(3 * plane);
    kernels::block_mean_rgb(image.values(), image.width(), image.height(), Latent::kDownscale, means);
    auto v = out.values();
    for (std::size_t i = 0; i < plane; ++i) {
        const double r = means[i], g = means[plane + i], b = means[2 * plane + i];
        v[i] = 2.0 * r;
        v[plane + i] = 2.0 * g;
        v[2 * plane + i] = 2.0 * b;
        v[3 * plane + i] = (2.0 / 3.0) * (r + g + b);
    }
    return out;
}

RgbImage SyntheticBackend::vae_decode(const Latent& latent) {
    require(latent.all_finite(), "vae_decode: latent must be finite");
    const std::size_t f = Latent::kDownscale;
    const std::size_t w = latent.width() * f;
    const std::size_t h = latent.height() * f;
    RgbImage out(w, h);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            for (std::size_t c = 0; c < 3; ++c) {
                const double v = 0.5 * latent.at(c, y / f, x / f);
                out.at(x, y, c) = static_cast<float>(std::clamp(v, 0.0, 1.0));
            }
        }
    }
    return out;
}

Latent SyntheticBackend::noise_field(const Latent& latent, int timestep, const PromptEmbedding& embedding) const {
    std::uint64_t key = hash_bytes(std::as_bytes(latent.values()), seed_);
    key = hash_combine(key, static_cast<std::uint64_t>(timestep));
    key = hash_combine(key, embedding.digest());
    Rng rng(key);

    Latent out(latent.height(), latent.width());
    // Each term is a product of two sines (variance 1/4); this amplitude gives
    // the summed field unit variance.
    const double amplitude = 2.0 / std::sqrt(static_cast<double>(kFieldTerms));
    std::vector<double> along_x(latent.width()), along_y(latent.height());
    for (std::size_t c = 0; c < latent.channels(); ++c) {
        for (int term = 0; term < kFieldTerms; ++term) {
            const double fx = 0.05 + 0.55 * rng.uniform();
            const double fy = 0.05 + 0.55 * rng.uniform();
            const double px = 2.0 * std::numbers::pi * rng.uniform();
            const double py = 2.0 * std::numbers::pi * rng.uniform();
            for (std::size_t x = 0; x < along_x.size(); ++x) along_x[x] = std::sin(fx * static_cast<double>(x) + px);
            for (std::size_t y = 0; y < along_y.size(); ++y) along_y[y] = amplitude * std::sin(fy * static_cast<double>(y) + py);
            for (std::size_t y = 0; y < along_y.size(); ++y) {
                for (std::size_t x = 0; x < along_x.size(); ++x) out.at(c, y, x) += along_y[y] * along_x[x];
            }
        }
    }
    return out;
}

std::vector<Latent> SyntheticBackend::predict_noise(std::span<const NoiseQuery> batch) {
    std::vector<Latent> out;
    out.reserve(batch.size());
    for (const auto& q : batch) {
        require(q.latent != nullptr && q.embedding != nullptr, "predict_noise: incomplete query");
        require(q.timestep >= 1, "predict_noise: timestep must be at least 1");
        out.push_back(noise_field(*q.latent, q.timestep, *q.embedding));
    }
    return out;
}

GrayImage SyntheticBackend::extract_lines(const RgbImage& image) {
    return xdog_extract(rgb_to_gray(image), xdog_);
}

}  // namespace sketchguide
