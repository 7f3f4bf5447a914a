// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

#include "sketchguide/image.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sketchguide {

void require(bool condition, const char* message) {
    if (!condition) throw ContractViolation(message);
}

namespace {

void clamp_values(std::span<float> values) {
    for (float& v : values) v = std::isnan(v) ? 0.0f : std::clamp(v, 0.0f, 1.0f);
}

}  // namespace

GrayImage::GrayImage(std::size_t width, std::size_t height, float fill)
    : width_(width), height_(height), data_(width * height, fill) {
    require(width > 0 && height > 0, "GrayImage: width and height must be positive");
}

GrayImage::GrayImage(std::size_t width, std::size_t height, std::vector<float> data)
    : width_(width), height_(height), data_(std::move(data)) {
    require(width > 0 && height > 0, "GrayImage: width and height must be positive");
    require(data_.size() == width * height, "GrayImage: data length must equal width*height");
    require(std::all_of(data_.begin(), data_.end(), [](float v) { return v >= 0.0f && v <= 1.0f; }),
            "GrayImage: intensities must lie in [0,1]");
}

void GrayImage::clamp_unit() { clamp_values(data_); }

RgbImage::RgbImage(std::size_t width, std::size_t height, float fill)
    : width_(width), height_(height), data_(width * height * 3, fill) {
    require(width > 0 && height > 0, "RgbImage: width and height must be positive");
}

RgbImage::RgbImage(std::size_t width, std::size_t height, std::vector<float> data)
    : width_(width), height_(height), data_(std::move(data)) {
    require(width > 0 && height > 0, "RgbImage: width and height must be positive");
    require(data_.size() == width * height * 3, "RgbImage: data length must equal 3*width*height");
    require(std::all_of(data_.begin(), data_.end(), [](float v) { return v >= 0.0f && v <= 1.0f; }),
            "RgbImage: channel values must lie in [0,1]");
}

void RgbImage::clamp_unit() { clamp_values(data_); }

Latent::Latent(std::size_t height, std::size_t width, double fill)
    : height_(height), width_(width), data_(kChannels * height * width, fill) {
    require(height > 0 && width > 0, "Latent: spatial dims must be positive");
}

Latent::Latent(std::size_t height, std::size_t width, std::vector<double> data)
    : height_(height), width_(width), data_(std::move(data)) {
    require(height > 0 && width > 0, "Latent: spatial dims must be positive");
    require(data_.size() == kChannels * height * width, "Latent: data length must equal 4*h*w");
    require(all_finite(), "Latent: values must be finite");
}

Latent Latent::for_source(std::size_t source_width, std::size_t source_height) {
    require(source_width % kDownscale == 0 && source_height % kDownscale == 0,
            "Latent: source dims must be divisible by 8");
    return Latent(source_height / kDownscale, source_width / kDownscale);
}

bool Latent::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string shape_string(const Latent& latent) {
    std::ostringstream os;
    os << '[' << latent.channels() << ',' << latent.height() << ',' << latent.width() << ']';
    return os.str();
}

}  // namespace sketchguide
