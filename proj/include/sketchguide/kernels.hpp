// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

// Data-parallel image kernels. Every kernel here has a single-threaded
// counterpart in reference.hpp with the same signature; tests hold the two
// against each other and the benchmark target times both.
//
// Row- and column-parallel kernels are bit-identical to the serial
// reference. Reductions accumulate per row and then sum rows in order, so
// their result does not depend on the thread count.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

namespace sketchguide::kernels {

struct DotNorms {
    double dot = 0.0;
    double norm_a_sq = 0.0;
    double norm_b_sq = 0.0;
};

/// a·b, ‖a‖², ‖b‖² over flattened rows of `row_length` values.
DotNorms dot_norms(std::span<const float> a, std::span<const float> b, std::size_t row_length);

/// Align-corners bilinear resampling of an interleaved `channels`-plane image.
void resize_bilinear(std::span<const float> src, std::size_t src_width, std::size_t src_height,
                     std::size_t channels, std::span<float> dst, std::size_t dst_width,
                     std::size_t dst_height);

/// Per-gap domain-transform distances 1 + ratio·|ΔI|. Entry (x,y) holds the
/// gap between x-1 and x (horizontal) or y-1 and y (vertical); the first
/// column/row is left at 1.
void gap_distances(std::span<const float> image, std::size_t width, std::size_t height,
                   float ratio, std::span<float> horizontal, std::span<float> vertical);

/// weights[i] = base^distances[i]. Flat gaps (distance 1) get `base` itself.
void feedback_weights(std::span<const float> distances, float base, std::span<float> weights);

/// weights[i] *= weights[i]
void square_weights(std::span<float> weights);

/// Causal + anti-causal recursive pass along every row, in place.
void recursive_rows(std::span<float> image, std::size_t width, std::size_t height,
                    std::span<const float> weights);

/// Causal + anti-causal recursive pass along every column, in place.
void recursive_cols(std::span<float> image, std::size_t width, std::size_t height,
                    std::span<const float> weights);

/// Separable Gaussian blur, radius ceil(3σ), replicated borders.
void gaussian_blur(std::span<const float> src, std::size_t width, std::size_t height, double sigma,
                   std::span<float> dst);

/// Mean over factor×factor blocks of an interleaved RGB image into 3 planar
/// channels of (width/factor)×(height/factor) doubles.
void block_mean_rgb(std::span<const float> rgb, std::size_t width, std::size_t height,
                    std::size_t factor, std::span<double> planes);

// Shared scalar building blocks.

/// Moves x toward prev by weight w; the result never leaves [min(x,prev), max(x,prev)].
template <class T>
inline T blend(T x, T prev, T w) {
    const T v = x + w * (prev - x);
    return std::clamp(v, std::min(x, prev), std::max(x, prev));
}

/// base^distance; the flat-gap case skips the exp, which matters on line
/// maps that are mostly blank paper.
inline float feedback_weight(float distance, float base, float log_base) {
    return distance == 1.0f ? base : std::exp(log_base * distance);
}

/// One causal pass: y[0] = x[0], y[i] = blend(x[i], y[i-1], w[i]).
template <class T>
inline void causal_pass(T* data, std::size_t n, std::ptrdiff_t stride, const T* weights) {
    for (std::size_t i = 1; i < n; ++i) {
        const std::ptrdiff_t at = static_cast<std::ptrdiff_t>(i) * stride;
        data[at] = blend(data[at], data[at - stride], weights[at]);
    }
}

/// Mirror of causal_pass; the gap weight between i and i+1 lives at i+1.
template <class T>
inline void anticausal_pass(T* data, std::size_t n, std::ptrdiff_t stride, const T* weights) {
    if (n < 2) return;
    for (std::size_t i = n - 1; i-- > 0;) {
        const std::ptrdiff_t at = static_cast<std::ptrdiff_t>(i) * stride;
        data[at] = blend(data[at], data[at + stride], weights[at + stride]);
    }
}

int max_threads();
void set_threads(int n);

}  // namespace sketchguide::kernels
