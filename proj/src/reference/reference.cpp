// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

#include "sketchguide/reference.hpp"

#include <cmath>
#include <vector>

#include "../kernels/gaussian_taps.hpp"

namespace sketchguide::reference {

kernels::DotNorms dot_norms(std::span<const float> a, std::span<const float> b, std::size_t row_length) {
    // Row partials first, then rows in order, so results do not depend on the thread count.
    kernels::DotNorms total;
    if (row_length == 0) return total;
    for (std::size_t start = 0; start + row_length <= a.size(); start += row_length) {
        kernels::DotNorms row;
        for (std::size_t i = start; i < start + row_length; ++i) {
            row.dot += static_cast<double>(a[i]) * b[i];
            row.norm_a_sq += static_cast<double>(a[i]) * a[i];
            row.norm_b_sq += static_cast<double>(b[i]) * b[i];
        }
        total.dot += row.dot;
        total.norm_a_sq += row.norm_a_sq;
        total.norm_b_sq += row.norm_b_sq;
    }
    return total;
}

void resize_bilinear(std::span<const float> src, std::size_t src_width, std::size_t src_height,
                     std::size_t channels, std::span<float> dst, std::size_t dst_width,
                     std::size_t dst_height) {
    const double sx = dst_width > 1 ? static_cast<double>(src_width - 1) / static_cast<double>(dst_width - 1) : 0.0;
    const double sy = dst_height > 1 ? static_cast<double>(src_height - 1) / static_cast<double>(dst_height - 1) : 0.0;
    for (std::size_t y = 0; y < dst_height; ++y) {
        const double py = static_cast<double>(y) * sy;
        const std::size_t y0 = std::min(static_cast<std::size_t>(py), src_height - 1);
        const std::size_t y1 = std::min(y0 + 1, src_height - 1);
        const auto fy = static_cast<float>(py - static_cast<double>(y0));
        for (std::size_t x = 0; x < dst_width; ++x) {
            const double px = static_cast<double>(x) * sx;
            const std::size_t x0 = std::min(static_cast<std::size_t>(px), src_width - 1);
            const std::size_t x1 = std::min(x0 + 1, src_width - 1);
            const auto fx = static_cast<float>(px - static_cast<double>(x0));
            for (std::size_t c = 0; c < channels; ++c) {
                const float a = src[(y0 * src_width + x0) * channels + c];
                const float b = src[(y0 * src_width + x1) * channels + c];
                const float d = src[(y1 * src_width + x0) * channels + c];
                const float e = src[(y1 * src_width + x1) * channels + c];
                const float upper = a + fx * (b - a);
                const float lower = d + fx * (e - d);
                dst[(y * dst_width + x) * channels + c] = std::clamp(upper + fy * (lower - upper), 0.0f, 1.0f);
            }
        }
    }
}

void gap_distances(std::span<const float> image, std::size_t width, std::size_t height,
                   float ratio, std::span<float> horizontal, std::span<float> vertical) {
    for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
            const std::size_t i = y * width + x;
            horizontal[i] = x == 0 ? 1.0f : 1.0f + ratio * std::fabs(image[i] - image[i - 1]);
            vertical[i] = y == 0 ? 1.0f : 1.0f + ratio * std::fabs(image[i] - image[i - width]);
        }
    }
}

void feedback_weights(std::span<const float> distances, float base, std::span<float> weights) {
    const float log_base = std::log(base);
    for (std::size_t i = 0; i < distances.size(); ++i) weights[i] = kernels::feedback_weight(distances[i], base, log_base);
}

void square_weights(std::span<float> weights) {
    for (float& w : weights) w = w * w;
}

void recursive_rows(std::span<float> image, std::size_t width, std::size_t height,
                    std::span<const float> weights) {
    for (std::size_t y = 0; y < height; ++y) {
        kernels::causal_pass(image.data() + y * width, width, 1, weights.data() + y * width);
        kernels::anticausal_pass(image.data() + y * width, width, 1, weights.data() + y * width);
    }
}

void recursive_cols(std::span<float> image, std::size_t width, std::size_t height,
                    std::span<const float> weights) {
    const auto stride = static_cast<std::ptrdiff_t>(width);
    for (std::size_t x = 0; x < width; ++x) {
        kernels::causal_pass(image.data() + x, height, stride, weights.data() + x);
        kernels::anticausal_pass(image.data() + x, height, stride, weights.data() + x);
    }
}

void gaussian_blur(std::span<const float> src, std::size_t width, std::size_t height, double sigma,
                   std::span<float> dst) {
    using kernels::detail::clamp_index;
    const std::vector<float> taps = kernels::detail::gaussian_taps(sigma);
    const auto radius = static_cast<std::ptrdiff_t>(taps.size() / 2);
    std::vector<float> tmp(width * height);
    for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
            float acc = 0.0f;
            for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
                const std::size_t sx = clamp_index(static_cast<std::ptrdiff_t>(x) + k, width);
                acc += taps[static_cast<std::size_t>(k + radius)] * src[y * width + sx];
            }
            tmp[y * width + x] = acc;
        }
    }
    for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
            float acc = 0.0f;
            for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
                const std::size_t sy = clamp_index(static_cast<std::ptrdiff_t>(y) + k, height);
                acc += taps[static_cast<std::size_t>(k + radius)] * tmp[sy * width + x];
            }
            dst[y * width + x] = acc;
        }
    }
}

void block_mean_rgb(std::span<const float> rgb, std::size_t width, std::size_t height,
                    std::size_t factor, std::span<double> planes) {
    const std::size_t out_w = width / factor;
    const std::size_t out_h = height / factor;
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t by = 0; by < out_h; ++by) {
            for (std::size_t bx = 0; bx < out_w; ++bx) {
                double sum = 0.0;
                for (std::size_t dy = 0; dy < factor; ++dy) {
                    for (std::size_t dx = 0; dx < factor; ++dx) {
                        sum += rgb[((by * factor + dy) * width + bx * factor + dx) * 3 + c];
                    }
                }
                planes[(c * out_h + by) * out_w + bx] = sum / static_cast<double>(factor * factor);
            }
        }
    }
}

}  // namespace sketchguide::reference
