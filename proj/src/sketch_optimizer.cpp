// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

#include "sketchguide/sketch_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sketchguide/backend.hpp"
#include "sketchguide/imaging.hpp"
#include "sketchguide/kernels.hpp"

namespace sketchguide {

void FilterParams::validate() const {
    require(sigma_s > 0.0, "FilterParams: sigma_s must be positive");
    require(sigma_r > 0.0, "FilterParams: sigma_r must be positive");
    require(iterations >= 1, "FilterParams: iterations must be at least 1");
}

void XdogParams::validate() const {
    require(sigma > 0.0, "XdogParams: sigma must be positive");
    require(k > 1.0, "XdogParams: k must exceed 1");
}

std::vector<double> rf_causal_1d(std::span<const double> signal, std::span<const double> distances, double a) {
    require(signal.size() == distances.size(), "rf_filter_1d: one distance per sample is required");
    require(a > 0.0 && a < 1.0, "rf_filter_1d: feedback base must lie in (0,1)");
    std::vector<double> y(signal.begin(), signal.end());
    std::vector<double> w(distances.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::pow(a, distances[i]);
    kernels::causal_pass(y.data(), y.size(), 1, w.data());
    return y;
}

std::vector<double> rf_filter_1d(std::span<const double> signal, std::span<const double> distances, double a) {
    std::vector<double> y = rf_causal_1d(signal, distances, a);
    std::vector<double> w(distances.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::pow(a, distances[i]);
    kernels::anticausal_pass(y.data(), y.size(), 1, w.data());
    return y;
}

namespace {

// Per-thread working buffers. Rounds filter several full-resolution images
// back to back; reusing these keeps megabytes of allocation (and the page
// faults that come with fresh mappings) off the hot path.
struct Scratch {
    std::vector<float> weights_h, weights_v, values;
};

Scratch& scratch() {
    thread_local Scratch s;
    return s;
}

}  // namespace

double iteration_sigma(double sigma_s, int iteration, int iterations) {
    return sigma_s * std::sqrt(3.0) * std::pow(2.0, iterations - iteration) /
           std::sqrt(std::pow(4.0, iterations) - 1.0);
}

GrayImage rf_filter_2d(GrayImage img, const FilterParams& params) {
    params.validate();
    const std::size_t w = img.width();
    const std::size_t h = img.height();
    const std::size_t n = img.size();

    auto& weights_h = scratch().weights_h;
    auto& weights_v = scratch().weights_v;
    weights_h.resize(n);
    weights_v.resize(n);
    kernels::gap_distances(img.pixels(), w, h, static_cast<float>(params.sigma_s / params.sigma_r), weights_h,
                           weights_v);

    // σ halves from one iteration to the next, so each iteration's feedback
    // base is the square of the previous one and so are its weights.
    const double sigma = iteration_sigma(params.sigma_s, 1, params.iterations);
    const auto a = static_cast<float>(std::exp(-std::numbers::sqrt2 / sigma));
    kernels::feedback_weights(weights_h, a, weights_h);
    kernels::feedback_weights(weights_v, a, weights_v);

    for (int i = 1; i <= params.iterations; ++i) {
        if (i > 1) {
            kernels::square_weights(weights_h);
            kernels::square_weights(weights_v);
        }
        kernels::recursive_rows(img.pixels(), w, h, weights_h);
        kernels::recursive_cols(img.pixels(), w, h, weights_v);
    }
    return img;
}

GrayImage xdog_extract(const GrayImage& img, const XdogParams& params) {
    params.validate();
    const std::size_t w = img.width();
    const std::size_t h = img.height();
    std::vector<float> narrow(img.size()), wide(img.size());
    kernels::gaussian_blur(img.pixels(), w, h, params.sigma, narrow);
    kernels::gaussian_blur(img.pixels(), w, h, params.k * params.sigma, wide);

    GrayImage out(w, h);
    auto dst = out.pixels();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        const double d = (1.0 + params.p) * narrow[i] - params.p * wide[i];
        const double v = d >= params.eps ? 1.0 : 1.0 + std::tanh(params.phi * (d - params.eps));
        dst[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
    return out;
}

namespace {

std::size_t nearest_rank(double q, std::size_t n) {
    return static_cast<std::size_t>(std::lround(q * static_cast<double>(n - 1)));
}

// Nearest-rank 2nd and 98th percentiles. The second selection only has to
// look above the first.
std::pair<float, float> stretch_bounds(std::span<const float> pixels) {
    auto& values = scratch().values;
    values.assign(pixels.begin(), pixels.end());
    const auto lo_at = values.begin() + static_cast<std::ptrdiff_t>(nearest_rank(0.02, values.size()));
    const auto hi_at = values.begin() + static_cast<std::ptrdiff_t>(nearest_rank(0.98, values.size()));
    std::nth_element(values.begin(), lo_at, values.end());
    if (hi_at > lo_at) std::nth_element(lo_at + 1, hi_at, values.end());
    return {*lo_at, *hi_at};
}

}  // namespace

GrayImage optimize(GrayImage rough, const FilterParams& params) {
    const auto [lo_it, hi_it] = std::minmax_element(rough.pixels().begin(), rough.pixels().end());
    if (*lo_it == *hi_it) return rough;

    GrayImage out = rf_filter_2d(std::move(rough), params);
    auto [lo, hi] = stretch_bounds(out.pixels());
    if (!(hi > lo)) {
        // Percentiles collapse when fewer than 2% of pixels differ; fall back
        // to the full range so the stretch still reaches 0 and 1.
        const auto [mn, mx] = std::minmax_element(out.pixels().begin(), out.pixels().end());
        lo = *mn;
        hi = *mx;
        if (!(hi > lo)) return out;
    }
    const float scale = 1.0f / (hi - lo);
    for (float& v : out.pixels()) v = std::clamp((v - lo) * scale, 0.0f, 1.0f);
    return out;
}

GrayImage refine_candidate(ModelBackend& backend, const RgbImage& candidate, const FilterParams& params) {
    return optimize(backend.extract_lines(candidate), params);
}

}  // namespace sketchguide
