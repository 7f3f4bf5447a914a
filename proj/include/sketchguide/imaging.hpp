// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sketchguide/image.hpp"

namespace sketchguide {

/// (a·b)/(‖a‖‖b‖) over flattened intensities. A zero-norm argument yields 0,
/// so a blank canvas always counts as maximally dissimilar.
double cosine_similarity(const GrayImage& a, const GrayImage& b);

/// Align-corners bilinear resampling.
GrayImage resize_bilinear(const GrayImage& img, std::size_t width, std::size_t height);
RgbImage resize_bilinear(const RgbImage& img, std::size_t width, std::size_t height);

/// 0.299R + 0.587G + 0.114B
GrayImage rgb_to_gray(const RgbImage& img);
RgbImage gray_to_rgb(const GrayImage& img);

/// 1 - v per pixel: stroke coverage of a dark-on-light sketch.
GrayImage ink(const GrayImage& img);

/// Snaps every value to the nearest k/255, the values a PNG round trip keeps.
GrayImage quantize8(const GrayImage& img);

// PNG I/O, 8-bit. Intensities are stored as round(v*255).
std::vector<std::uint8_t> encode_png(const GrayImage& img);
std::vector<std::uint8_t> encode_png(const RgbImage& img);
GrayImage decode_png_gray(std::span<const std::uint8_t> bytes);
RgbImage decode_png_rgb(std::span<const std::uint8_t> bytes);

void write_png(const std::filesystem::path& path, const GrayImage& img);
void write_png(const std::filesystem::path& path, const RgbImage& img);
GrayImage read_png_gray(const std::filesystem::path& path);
RgbImage read_png_rgb(const std::filesystem::path& path);

/// Thrown for unreadable or malformed PNG data.
class ImageIoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace sketchguide
