// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sketchguide {

/// Thrown when a caller breaks an operation's precondition (shape, range).
class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

void require(bool condition, const char* message);

/// Single-channel raster, row-major, intensities in [0,1].
/// Sketches are dark strokes on a light ground (1 = paper).
class GrayImage {
public:
    GrayImage() = default;
    GrayImage(std::size_t width, std::size_t height, float fill = 0.0f);
    GrayImage(std::size_t width, std::size_t height, std::vector<float> data);

    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    float& at(std::size_t x, std::size_t y) { return data_[y * width_ + x]; }
    float at(std::size_t x, std::size_t y) const { return data_[y * width_ + x]; }

    std::span<float> pixels() { return data_; }
    std::span<const float> pixels() const { return data_; }
    std::span<float> row(std::size_t y) { return {data_.data() + y * width_, width_}; }
    std::span<const float> row(std::size_t y) const { return {data_.data() + y * width_, width_}; }

    /// Clamps every value into [0,1]; NaN becomes 0.
    void clamp_unit();

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<float> data_;
};

/// Interleaved RGB raster, row-major, every channel in [0,1].
class RgbImage {
public:
    RgbImage() = default;
    RgbImage(std::size_t width, std::size_t height, float fill = 0.0f);
    RgbImage(std::size_t width, std::size_t height, std::vector<float> data);

    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }
    bool empty() const { return data_.empty(); }

    float& at(std::size_t x, std::size_t y, std::size_t c) { return data_[(y * width_ + x) * 3 + c]; }
    float at(std::size_t x, std::size_t y, std::size_t c) const { return data_[(y * width_ + x) * 3 + c]; }

    std::span<float> values() { return data_; }
    std::span<const float> values() const { return data_; }

    void clamp_unit();

    friend bool operator==(const RgbImage&, const RgbImage&) = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<float> data_;
};

/// 4-channel planar latent at 1/8 of the source resolution. Values are
/// unbounded but must stay finite.
class Latent {
public:
    static constexpr std::size_t kChannels = 4;
    static constexpr std::size_t kDownscale = 8;

    Latent() = default;
    Latent(std::size_t height, std::size_t width, double fill = 0.0);
    Latent(std::size_t height, std::size_t width, std::vector<double> data);

    /// Latent shape for a source image; source dims must be multiples of 8.
    static Latent for_source(std::size_t source_width, std::size_t source_height);

    std::size_t channels() const { return kChannels; }
    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    std::size_t size() const { return data_.size(); }
    std::size_t plane_size() const { return height_ * width_; }

    double& at(std::size_t c, std::size_t y, std::size_t x) { return data_[(c * height_ + y) * width_ + x]; }
    double at(std::size_t c, std::size_t y, std::size_t x) const { return data_[(c * height_ + y) * width_ + x]; }

    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }

    bool same_shape(const Latent& other) const {
        return height_ == other.height_ && width_ == other.width_;
    }
    bool all_finite() const;

    friend bool operator==(const Latent&, const Latent&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<double> data_;
};

std::string shape_string(const Latent& latent);

}  // namespace sketchguide
