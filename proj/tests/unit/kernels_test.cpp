// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

// The OpenMP kernels against their serial reference, bit for bit, across
// shapes and thread counts.

#include <cstring>

#include "doctest.h"
#include "sketchguide/kernels.hpp"
#include "sketchguide/reference.hpp"
#include "test_support.hpp"

using namespace sketchguide;

namespace {

struct Shape {
    std::size_t w, h;
};

const Shape kShapes[] = {{1, 1}, {2, 1}, {1, 7}, {7, 5}, {64, 33}, {130, 97}, {257, 9}};
const int kThreads[] = {1, 2, 3, 4};

template <class T>
bool bit_equal(const std::vector<T>& a, const std::vector<T>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0;
}

std::vector<float> random_values(std::size_t n, std::uint64_t seed) {
    const GrayImage g = testing::random_gray(n, 1, seed);
    return {g.pixels().begin(), g.pixels().end()};
}

std::vector<float> random_weights(std::size_t n, std::uint64_t seed) {
    auto w = random_values(n, seed);
    for (float& v : w) v *= 0.95f;
    return w;
}

/// Restores the thread count on scope exit.
struct ThreadGuard {
    int saved = kernels::max_threads();
    ~ThreadGuard() { kernels::set_threads(saved); }
};

}  // namespace

TEST_SUITE("kernels") {
    TEST_CASE("dot_norms") {
        ThreadGuard guard;
        for (const auto s : kShapes) {
            const auto a = random_values(s.w * s.h, 1), b = random_values(s.w * s.h, 2);
            const auto want = reference::dot_norms(a, b, s.w);
            for (int t : kThreads) {
                kernels::set_threads(t);
                const auto got = kernels::dot_norms(a, b, s.w);
                REQUIRE(got.dot == want.dot);
                REQUIRE(got.norm_a_sq == want.norm_a_sq);
                REQUIRE(got.norm_b_sq == want.norm_b_sq);
            }
        }
    }

    TEST_CASE("resize_bilinear") {
        ThreadGuard guard;
        for (const auto s : kShapes) {
            for (std::size_t channels : {1u, 3u}) {
                const auto src = random_values(s.w * s.h * channels, 3);
                for (const Shape d : {Shape{1, 1}, Shape{s.w * 2 + 1, s.h + 3}, Shape{(s.w + 1) / 2, (s.h + 1) / 2}}) {
                    std::vector<float> want(d.w * d.h * channels), got(want.size());
                    reference::resize_bilinear(src, s.w, s.h, channels, want, d.w, d.h);
                    for (int t : kThreads) {
                        kernels::set_threads(t);
                        kernels::resize_bilinear(src, s.w, s.h, channels, got, d.w, d.h);
                        REQUIRE(bit_equal(got, want));
                    }
                }
            }
        }
    }

    TEST_CASE("gap_distances, feedback_weights and square_weights") {
        ThreadGuard guard;
        for (const auto s : kShapes) {
            const auto img = random_values(s.w * s.h, 4);
            const std::size_t n = img.size();
            std::vector<float> wh(n), wv(n), gh(n), gv(n);
            reference::gap_distances(img, s.w, s.h, 80.0f, wh, wv);
            std::vector<float> fw(n), gw(n);
            reference::feedback_weights(wh, 0.8f, fw);
            std::vector<float> sq = fw;
            reference::square_weights(sq);
            for (int t : kThreads) {
                kernels::set_threads(t);
                kernels::gap_distances(img, s.w, s.h, 80.0f, gh, gv);
                REQUIRE(bit_equal(gh, wh));
                REQUIRE(bit_equal(gv, wv));
                kernels::feedback_weights(gh, 0.8f, gw);
                REQUIRE(bit_equal(gw, fw));
                kernels::square_weights(gw);
                REQUIRE(bit_equal(gw, sq));
            }
        }
    }

    TEST_CASE("recursive_rows and recursive_cols") {
        ThreadGuard guard;
        for (const auto s : kShapes) {
            const auto img = random_values(s.w * s.h, 5);
            const auto w = random_weights(s.w * s.h, 6);
            auto rows_want = img, cols_want = img;
            reference::recursive_rows(rows_want, s.w, s.h, w);
            reference::recursive_cols(cols_want, s.w, s.h, w);
            for (int t : kThreads) {
                kernels::set_threads(t);
                auto rows = img, cols = img;
                kernels::recursive_rows(rows, s.w, s.h, w);
                kernels::recursive_cols(cols, s.w, s.h, w);
                REQUIRE(bit_equal(rows, rows_want));
                REQUIRE(bit_equal(cols, cols_want));
            }
        }
    }

    TEST_CASE("gaussian_blur") {
        ThreadGuard guard;
        for (const auto s : kShapes) {
            const auto img = random_values(s.w * s.h, 7);
            for (double sigma : {0.5, 1.0, 1.6, 4.0}) {
                std::vector<float> want(img.size()), got(img.size());
                reference::gaussian_blur(img, s.w, s.h, sigma, want);
                for (int t : kThreads) {
                    kernels::set_threads(t);
                    kernels::gaussian_blur(img, s.w, s.h, sigma, got);
                    REQUIRE(bit_equal(got, want));
                }
            }
        }
    }

    TEST_CASE("block_mean_rgb") {
        ThreadGuard guard;
        for (const Shape s : {Shape{8, 8}, Shape{64, 24}, Shape{136, 72}}) {
            const auto rgb = random_values(s.w * s.h * 3, 8);
            std::vector<double> want(3 * (s.w / 8) * (s.h / 8)), got(want.size());
            reference::block_mean_rgb(rgb, s.w, s.h, 8, want);
            for (int t : kThreads) {
                kernels::set_threads(t);
                kernels::block_mean_rgb(rgb, s.w, s.h, 8, got);
                REQUIRE(bit_equal(got, want));
            }
        }
    }

    TEST_CASE("blend stays between its endpoints") {
        for (float w : {0.0f, 0.3f, 0.999f, 1.0f}) {
            const float v = kernels::blend(0.1f, 0.7f, w);
            CHECK(v >= 0.1f);
            CHECK(v <= 0.7f);
        }
        CHECK(kernels::blend(0.5f, 0.5f, 0.3f) == 0.5f);
    }

    TEST_CASE("feedback weight skips exp only on flat gaps") {
        const float base = 0.8f;
        const float log_base = std::log(base);
        CHECK(kernels::feedback_weight(1.0f, base, log_base) == base);
        CHECK(kernels::feedback_weight(3.0f, base, log_base) == doctest::Approx(0.512).epsilon(1e-6));
    }
}
