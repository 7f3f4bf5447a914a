// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

#include "sketchguide/kernels.hpp"

#include <cmath>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "gaussian_taps.hpp"

namespace sketchguide::kernels {

namespace {

using Index = std::ptrdiff_t;

Index as_index(std::size_t n) { return static_cast<Index>(n); }

// Columns per task in the column pass; wide enough to keep whole cache lines.
constexpr std::size_t kColumnBlock = 64;

// Rows advanced together in the row pass.
constexpr std::size_t kRowGroup = 8;

// Causal then anti-causal pass over `rows` consecutive rows, advancing
// `Lanes` rows per x step.
template <std::size_t Lanes>
void row_group(float* data, const float* w, std::size_t width, std::size_t rows) {
    for (std::size_t r0 = 0; r0 < rows; r0 += Lanes) {
        float* base = data + r0 * width;
        const float* wb = w + r0 * width;
        for (std::size_t x = 1; x < width; ++x) {
            for (std::size_t r = 0; r < Lanes; ++r) {
                float* row = base + r * width;
                row[x] = blend(row[x], row[x - 1], wb[r * width + x]);
            }
        }
        for (std::size_t x = width - 1; x-- > 0;) {
            for (std::size_t r = 0; r < Lanes; ++r) {
                float* row = base + r * width;
                row[x] = blend(row[x], row[x + 1], wb[r * width + x + 1]);
            }
        }
    }
}

}  // namespace

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_threads(int n) {
#ifdef _OPENMP
    omp_set_num_threads(n);
#else
    (void)n;
#endif
}

DotNorms dot_norms(std::span<const float> a, std::span<const float> b, std::size_t row_length) {
    const std::size_t rows = row_length == 0 ? 0 : a.size() / row_length;
    std::vector<DotNorms> partial(rows);

#pragma omp parallel for schedule(static)
    for (Index r = 0; r < as_index(rows); ++r) {
        const float* pa = a.data() + static_cast<std::size_t>(r) * row_length;
        const float* pb = b.data() + static_cast<std::size_t>(r) * row_length;
        DotNorms acc;
        for (std::size_t i = 0; i < row_length; ++i) {
            const double x = pa[i];
            const double y = pb[i];
            acc.dot += x * y;
            acc.norm_a_sq += x * x;
            acc.norm_b_sq += y * y;
        }
        partial[static_cast<std::size_t>(r)] = acc;
    }

    DotNorms total;
    for (const auto& p : partial) {
        total.dot += p.dot;
        total.norm_a_sq += p.norm_a_sq;
        total.norm_b_sq += p.norm_b_sq;
    }
    return total;
}

void resize_bilinear(std::span<const float> src, std::size_t src_width, std::size_t src_height,
                     std::size_t channels, std::span<float> dst, std::size_t dst_width,
                     std::size_t dst_height) {
    const double sx = dst_width > 1 ? static_cast<double>(src_width - 1) / static_cast<double>(dst_width - 1) : 0.0;
    const double sy = dst_height > 1 ? static_cast<double>(src_height - 1) / static_cast<double>(dst_height - 1) : 0.0;

    std::vector<std::size_t> x0(dst_width), x1(dst_width);
    std::vector<float> fx(dst_width);
    for (std::size_t x = 0; x < dst_width; ++x) {
        const double pos = static_cast<double>(x) * sx;
        x0[x] = std::min(static_cast<std::size_t>(pos), src_width - 1);
        x1[x] = std::min(x0[x] + 1, src_width - 1);
        fx[x] = static_cast<float>(pos - static_cast<double>(x0[x]));
    }

#pragma omp parallel for schedule(static)
    for (Index yi = 0; yi < as_index(dst_height); ++yi) {
        const auto y = static_cast<std::size_t>(yi);
        const double pos = static_cast<double>(y) * sy;
        const std::size_t y0 = std::min(static_cast<std::size_t>(pos), src_height - 1);
        const std::size_t y1 = std::min(y0 + 1, src_height - 1);
        const auto fy = static_cast<float>(pos - static_cast<double>(y0));
        const float* top = src.data() + y0 * src_width * channels;
        const float* bottom = src.data() + y1 * src_width * channels;
        float* out = dst.data() + y * dst_width * channels;
        for (std::size_t x = 0; x < dst_width; ++x) {
            for (std::size_t c = 0; c < channels; ++c) {
                const float a = top[x0[x] * channels + c];
                const float b = top[x1[x] * channels + c];
                const float d = bottom[x0[x] * channels + c];
                const float e = bottom[x1[x] * channels + c];
                const float upper = a + fx[x] * (b - a);
                const float lower = d + fx[x] * (e - d);
                out[x * channels + c] = std::clamp(upper + fy * (lower - upper), 0.0f, 1.0f);
            }
        }
    }
}

void gap_distances(std::span<const float> image, std::size_t width, std::size_t height,
                   float ratio, std::span<float> horizontal, std::span<float> vertical) {
#pragma omp parallel for schedule(static)
    for (Index yi = 0; yi < as_index(height); ++yi) {
        const auto y = static_cast<std::size_t>(yi);
        const float* row = image.data() + y * width;
        const float* above = y > 0 ? row - width : nullptr;
        float* h = horizontal.data() + y * width;
        float* v = vertical.data() + y * width;
        h[0] = 1.0f;
        for (std::size_t x = 1; x < width; ++x) h[x] = 1.0f + ratio * std::fabs(row[x] - row[x - 1]);
        if (above == nullptr) {
            for (std::size_t x = 0; x < width; ++x) v[x] = 1.0f;
        } else {
            for (std::size_t x = 0; x < width; ++x) v[x] = 1.0f + ratio * std::fabs(row[x] - above[x]);
        }
    }
}

void feedback_weights(std::span<const float> distances, float base, std::span<float> weights) {
    const float log_base = std::log(base);
    const std::size_t n = distances.size();
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < as_index(n); ++i) {
        weights[static_cast<std::size_t>(i)] = feedback_weight(distances[static_cast<std::size_t>(i)], base, log_base);
    }
}

void square_weights(std::span<float> weights) {
    const std::size_t n = weights.size();
#pragma omp parallel for simd schedule(static)
    for (Index i = 0; i < as_index(n); ++i) {
        const float w = weights[static_cast<std::size_t>(i)];
        weights[static_cast<std::size_t>(i)] = w * w;
    }
}

void recursive_rows(std::span<float> image, std::size_t width, std::size_t height,
                    std::span<const float> weights) {
    // A single row is one long dependency chain; stepping a group of rows in
    // lockstep gives the core independent chains to overlap.
    const std::size_t groups = (height + kRowGroup - 1) / kRowGroup;
#pragma omp parallel for schedule(static)
    for (Index gi = 0; gi < as_index(groups); ++gi) {
        const std::size_t begin = static_cast<std::size_t>(gi) * kRowGroup;
        float* data = image.data() + begin * width;
        const float* w = weights.data() + begin * width;
        if (begin + kRowGroup <= height) {
            row_group<kRowGroup>(data, w, width, kRowGroup);
        } else {
            row_group<1>(data, w, width, height - begin);
        }
    }
}

void recursive_cols(std::span<float> image, std::size_t width, std::size_t height,
                    std::span<const float> weights) {
    // Sweep rows in order while touching a contiguous block of columns, so the
    // inner loop is unit-stride and vectorizes.
    const std::size_t blocks = (width + kColumnBlock - 1) / kColumnBlock;
#pragma omp parallel for schedule(static)
    for (Index bi = 0; bi < as_index(blocks); ++bi) {
        const std::size_t begin = static_cast<std::size_t>(bi) * kColumnBlock;
        const std::size_t end = std::min(begin + kColumnBlock, width);
        float* data = image.data();
        const float* w = weights.data();
        for (std::size_t y = 1; y < height; ++y) {
            float* cur = data + y * width;
            const float* prev = cur - width;
            const float* wy = w + y * width;
            for (std::size_t x = begin; x < end; ++x) cur[x] = blend(cur[x], prev[x], wy[x]);
        }
        for (std::size_t y = height - 1; y-- > 0;) {
            float* cur = data + y * width;
            const float* next = cur + width;
            const float* wy = w + (y + 1) * width;
            for (std::size_t x = begin; x < end; ++x) cur[x] = blend(cur[x], next[x], wy[x]);
        }
    }
}

void gaussian_blur(std::span<const float> src, std::size_t width, std::size_t height, double sigma,
                   std::span<float> dst) {
    const std::vector<float> taps = detail::gaussian_taps(sigma);
    const Index radius = as_index(taps.size() / 2);
    std::vector<float> tmp(width * height);

#pragma omp parallel for schedule(static)
    for (Index yi = 0; yi < as_index(height); ++yi) {
        const float* row = src.data() + static_cast<std::size_t>(yi) * width;
        float* out = tmp.data() + static_cast<std::size_t>(yi) * width;
        for (Index x = 0; x < as_index(width); ++x) {
            float acc = 0.0f;
            for (Index k = -radius; k <= radius; ++k) {
                acc += taps[static_cast<std::size_t>(k + radius)] * row[detail::clamp_index(x + k, width)];
            }
            out[x] = acc;
        }
    }

#pragma omp parallel for schedule(static)
    for (Index yi = 0; yi < as_index(height); ++yi) {
        float* out = dst.data() + static_cast<std::size_t>(yi) * width;
        for (std::size_t x = 0; x < width; ++x) out[x] = 0.0f;
        for (Index k = -radius; k <= radius; ++k) {
            const float tap = taps[static_cast<std::size_t>(k + radius)];
            const float* in = tmp.data() + detail::clamp_index(yi + k, height) * width;
            for (std::size_t x = 0; x < width; ++x) out[x] += tap * in[x];
        }
    }
}

void block_mean_rgb(std::span<const float> rgb, std::size_t width, std::size_t height,
                    std::size_t factor, std::span<double> planes) {
    const std::size_t out_w = width / factor;
    const std::size_t out_h = height / factor;
    const std::size_t plane = out_w * out_h;
    const double inv_area = 1.0 / static_cast<double>(factor * factor);

#pragma omp parallel for schedule(static)
    for (Index byi = 0; byi < as_index(out_h); ++byi) {
        const auto by = static_cast<std::size_t>(byi);
        for (std::size_t bx = 0; bx < out_w; ++bx) {
            double sum[3] = {0.0, 0.0, 0.0};
            for (std::size_t dy = 0; dy < factor; ++dy) {
                const float* px = rgb.data() + ((by * factor + dy) * width + bx * factor) * 3;
                for (std::size_t dx = 0; dx < factor; ++dx) {
                    sum[0] += px[dx * 3 + 0];
                    sum[1] += px[dx * 3 + 1];
                    sum[2] += px[dx * 3 + 2];
                }
            }
            for (std::size_t c = 0; c < 3; ++c) planes[c * plane + by * out_w + bx] = sum[c] * inv_area;
        }
    }
}

}  // namespace sketchguide::kernels
