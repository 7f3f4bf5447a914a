// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

// Straight-line serial implementations of the kernels in kernels.hpp.
// Only tests and the benchmark link against these.

#pragma once

#include "sketchguide/kernels.hpp"

namespace sketchguide::reference {

kernels::DotNorms dot_norms(std::span<const float> a, std::span<const float> b, std::size_t row_length);

void resize_bilinear(std::span<const float> src, std::size_t src_width, std::size_t src_height,
                     std::size_t channels, std::span<float> dst, std::size_t dst_width,
                     std::size_t dst_height);

void gap_distances(std::span<const float> image, std::size_t width, std::size_t height,
                   float ratio, std::span<float> horizontal, std::span<float> vertical);

void feedback_weights(std::span<const float> distances, float base, std::span<float> weights);

void square_weights(std::span<float> weights);

void recursive_rows(std::span<float> image, std::size_t width, std::size_t height,
                    std::span<const float> weights);

void recursive_cols(std::span<float> image, std::size_t width, std::size_t height,
                    std::span<const float> weights);

void gaussian_blur(std::span<const float> src, std::size_t width, std::size_t height, double sigma,
                   std::span<float> dst);

void block_mean_rgb(std::span<const float> rgb, std::size_t width, std::size_t height,
                    std::size_t factor, std::span<double> planes);

}  // namespace sketchguide::reference
