// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <set>

#include "doctest.h"
#include "sketchguide/imaging.hpp"
#include "sketchguide/synthetic_backend.hpp"
#include "test_support.hpp"

using namespace sketchguide;

namespace {

RgbImage random_rgb(std::size_t w, std::size_t h, std::uint64_t seed) {
    const GrayImage q = quantize8(testing::random_gray(w * 3, h, seed));
    RgbImage img(w, h);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            for (std::size_t c = 0; c < 3; ++c) img.at(x, y, c) = q.at(x * 3 + c, y);
        }
    }
    return img;
}

/// Mean of each 8×8 block, repeated over the block. Values on the k/255 grid
/// sum exactly in double, so the order of addition does not matter.
RgbImage blockwise_mean(const RgbImage& img) {
    RgbImage out(img.width(), img.height());
    for (std::size_t by = 0; by < img.height(); by += 8) {
        for (std::size_t bx = 0; bx < img.width(); bx += 8) {
            for (std::size_t c = 0; c < 3; ++c) {
                double sum = 0.0;
                for (std::size_t y = by; y < by + 8; ++y) {
                    for (std::size_t x = bx; x < bx + 8; ++x) sum += img.at(x, y, c);
                }
                const auto mean = static_cast<float>(sum / 64.0);
                for (std::size_t y = by; y < by + 8; ++y) {
                    for (std::size_t x = bx; x < bx + 8; ++x) out.at(x, y, c) = mean;
                }
            }
        }
    }
    return out;
}

/// XDoG evaluated with full 2D Gaussian sums (no separability), replicated
/// borders, radius ceil(3σ).
GrayImage dense_xdog(const GrayImage& img, const XdogParams& p) {
    auto blur = [&](double sigma) {
        const int r = static_cast<int>(std::ceil(3.0 * sigma));
        double total = 0.0;
        for (int dy = -r; dy <= r; ++dy) {
            for (int dx = -r; dx <= r; ++dx) total += std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
        }
        std::vector<double> out(img.size());
        const int w = static_cast<int>(img.width()), h = static_cast<int>(img.height());
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int dy = -r; dy <= r; ++dy) {
                    for (int dx = -r; dx <= r; ++dx) {
                        const int sx = std::clamp(x + dx, 0, w - 1), sy = std::clamp(y + dy, 0, h - 1);
                        acc += std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma)) * img.at(sx, sy);
                    }
                }
                out[static_cast<std::size_t>(y * w + x)] = acc / total;
            }
        }
        return out;
    };
    const auto g1 = blur(p.sigma);
    const auto g2 = blur(p.k * p.sigma);
    GrayImage out(img.width(), img.height());
    for (std::size_t i = 0; i < img.size(); ++i) {
        const double d = (1 + p.p) * g1[i] - p.p * g2[i];
        out.pixels()[i] = static_cast<float>(std::clamp(d >= p.eps ? 1.0 : 1.0 + std::tanh(p.phi * (d - p.eps)), 0.0, 1.0));
    }
    return out;
}

std::size_t argmin_column(const GrayImage& g, std::size_t y) {
    std::size_t best = 0;
    for (std::size_t x = 1; x < g.width(); ++x) {
        if (g.at(x, y) < g.at(best, y)) best = x;
    }
    return best;
}

}  // namespace

TEST_SUITE("synthetic_backend") {
    TEST_CASE("prompt embeddings are deterministic") {
        SyntheticBackend a(1), b(1);
        CHECK(a.encode_prompt("a cat", "anime") == b.encode_prompt("a cat", "anime"));
        CHECK_FALSE(a.encode_prompt("a cat", "anime") == SyntheticBackend(2).encode_prompt("a cat", "anime"));
    }

    TEST_CASE("every style yields a distinct embedding") {
        BackendDescriptor d;
        d.styles = {"anime", "realistic", "ink", "watercolor", "charcoal", "pastel", "manga", "oil"};
        SyntheticBackend backend(0, d);
        std::set<std::uint64_t> digests;
        for (const auto& s : d.styles) digests.insert(backend.encode_prompt("a cat", s).digest());
        CHECK(digests.size() == d.styles.size());
    }

    TEST_CASE("the empty prompt has a valid embedding") {
        SyntheticBackend backend(0);
        const PromptEmbedding e = backend.encode_prompt("", "anime");
        CHECK(e.tokens == SyntheticBackend::kEmbedTokens);
        CHECK(e.dim == SyntheticBackend::kEmbedDim);
        REQUIRE(e.data.size() == e.tokens * e.dim);
        for (float v : e.data) CHECK(std::isfinite(v));
    }

    TEST_CASE("unknown styles are rejected") {
        SyntheticBackend backend(0);
        CHECK_THROWS_AS(backend.encode_prompt("x", "nope"), ContractViolation);
    }

    TEST_CASE("a constant image survives the codec") {
        SyntheticBackend backend(0);
        for (float c : {0.0f, 0.25f, 0.7f, 1.0f}) {
            const RgbImage img(64, 32, c);
            const Latent l = backend.vae_encode(img);
            for (std::size_t ch = 0; ch < 3; ++ch) {
                for (std::size_t y = 0; y < l.height(); ++y) {
                    for (std::size_t x = 0; x < l.width(); ++x) CHECK(l.at(ch, y, x) == l.at(ch, 0, 0));
                }
            }
            CHECK(backend.vae_decode(l) == img);
        }
    }

    TEST_CASE("decode of encode is the blockwise mean") {
        SyntheticBackend backend(0);
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const RgbImage img = random_rgb(48, 40, seed);
            CHECK(backend.vae_decode(backend.vae_encode(img)) == blockwise_mean(img));
        }
    }

    TEST_CASE("encode produces a 64x64 latent for 512x512 input") {
        SyntheticBackend backend(0);
        const Latent l = backend.vae_encode(RgbImage(512, 512, 0.5f));
        CHECK(l.channels() == 4);
        CHECK(l.height() == 64);
        CHECK(l.width() == 64);
    }

    TEST_CASE("encode rejects sizes that are not multiples of 8") {
        SyntheticBackend backend(0);
        CHECK_THROWS_AS(backend.vae_encode(RgbImage(12, 16)), ContractViolation);
    }

    TEST_CASE("noise prediction is deterministic") {
        SyntheticBackend backend(4);
        const Latent l = testing::random_latent(8, 8, 1);
        const PromptEmbedding e = backend.encode_prompt("x", "anime");
        const NoiseQuery q{&l, 500, &e};
        CHECK(backend.predict_noise({&q, 1}) == backend.predict_noise({&q, 1}));
    }

    TEST_CASE("a batch of two equals two single calls") {
        SyntheticBackend backend(4);
        const Latent a = testing::random_latent(8, 8, 1);
        const Latent b = testing::random_latent(8, 8, 2);
        const PromptEmbedding e = backend.encode_prompt("x", "anime");
        const PromptEmbedding u = backend.encode_prompt("", "anime");
        const std::vector<NoiseQuery> batch{{&a, 800, &u}, {&b, 600, &e}};
        const auto both = backend.predict_noise(batch);
        REQUIRE(both.size() == 2);
        CHECK(both[0] == backend.predict_noise({&batch[0], 1}).front());
        CHECK(both[1] == backend.predict_noise({&batch[1], 1}).front());
    }

    TEST_CASE("noise predictions are finite and shape-equal over random batches") {
        SyntheticBackend backend(9);
        const PromptEmbedding e = backend.encode_prompt("p", "anime");
        std::mt19937_64 rng(1);
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t n = 1 + rng() % 4, h = 1 + rng() % 9, w = 1 + rng() % 9;
            std::vector<Latent> latents;
            for (std::size_t i = 0; i < n; ++i) latents.push_back(testing::random_latent(h, w, rng(), 3.0));
            std::vector<NoiseQuery> batch;
            for (const auto& l : latents) batch.push_back({&l, static_cast<int>(1 + rng() % 1000), &e});
            const auto out = backend.predict_noise(batch);
            REQUIRE(out.size() == n);
            for (const auto& o : out) {
                REQUIRE(o.same_shape(latents.front()));
                REQUIRE(o.all_finite());
            }
        }
    }

    TEST_CASE("noise field has roughly unit variance") {
        SyntheticBackend backend(0);
        const PromptEmbedding e = backend.encode_prompt("p", "anime");
        double sq = 0.0;
        std::size_t n = 0;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const Latent l = testing::random_latent(64, 64, seed);
            const Latent field = backend.noise_field(l, 400, e);
            for (double v : field.values()) {
                sq += v * v;
                ++n;
            }
        }
        CHECK(sq / n == doctest::Approx(1.0).epsilon(0.2));
    }

    TEST_CASE("line extraction of a constant image is white") {
        SyntheticBackend backend(0);
        for (float c : {0.5f, 0.9f, 1.0f}) {
            const GrayImage out = backend.extract_lines(RgbImage(40, 24, c));
            CHECK(out.width() == 40);
            CHECK(out.height() == 24);
            for (float v : out.pixels()) REQUIRE(v == 1.0f);
        }
    }

    TEST_CASE("a vertical step gives a dark line at the step") {
        const std::size_t w = 48, h = 24, edge = 20;
        GrayImage step(w, h, 1.0f);
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < edge; ++x) step.at(x, y) = 0.0f;
        }
        const XdogParams p;
        const GrayImage got = xdog_extract(step, p);
        const GrayImage oracle = dense_xdog(step, p);
        for (std::size_t i = 0; i < got.size(); ++i) REQUIRE(got.pixels()[i] == doctest::Approx(oracle.pixels()[i]).epsilon(1e-4));
        for (std::size_t y = 0; y < h; ++y) {
            CHECK(argmin_column(got, y) == argmin_column(oracle, y));
            CHECK(std::abs(static_cast<long>(argmin_column(got, y)) - static_cast<long>(edge)) <= 2);
        }
        // Far from the step the response is paper white.
        CHECK(got.at(w - 3, h / 2) == 1.0f);
    }

    TEST_CASE("extract_lines keeps the input dimensions") {
        SyntheticBackend backend(0);
        const GrayImage out = backend.extract_lines(random_rgb(24, 16, 3));
        CHECK(out.width() == 24);
        CHECK(out.height() == 16);
    }
}
