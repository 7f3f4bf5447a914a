// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

#include "sketchguide/imaging.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "sketchguide/kernels.hpp"

namespace sketchguide {

double cosine_similarity(const GrayImage& a, const GrayImage& b) {
    require(a.width() == b.width() && a.height() == b.height(),
            "cosine_similarity: images must have identical dimensions");
    require(!a.empty(), "cosine_similarity: images must have at least one pixel");
    const auto sums = kernels::dot_norms(a.pixels(), b.pixels(), a.width());
    if (sums.norm_a_sq == 0.0 || sums.norm_b_sq == 0.0) return 0.0;
    const double x = sums.dot / (std::sqrt(sums.norm_a_sq) * std::sqrt(sums.norm_b_sq));
    return std::clamp(x, -1.0, 1.0);
}

GrayImage resize_bilinear(const GrayImage& img, std::size_t width, std::size_t height) {
    require(width > 0 && height > 0, "resize_bilinear: target dims must be positive");
    if (width == img.width() && height == img.height()) return img;
    GrayImage out(width, height);
    kernels::resize_bilinear(img.pixels(), img.width(), img.height(), 1, out.pixels(), width, height);
    return out;
}

RgbImage resize_bilinear(const RgbImage& img, std::size_t width, std::size_t height) {
    require(width > 0 && height > 0, "resize_bilinear: target dims must be positive");
    if (width == img.width() && height == img.height()) return img;
    RgbImage out(width, height);
    kernels::resize_bilinear(img.values(), img.width(), img.height(), 3, out.values(), width, height);
    return out;
}

GrayImage rgb_to_gray(const RgbImage& img) {
    GrayImage out(img.width(), img.height());
    auto src = img.values();
    auto dst = out.pixels();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        const double v = 0.299 * src[3 * i] + 0.587 * src[3 * i + 1] + 0.114 * src[3 * i + 2];
        dst[i] = std::clamp(static_cast<float>(v), 0.0f, 1.0f);
    }
    return out;
}

RgbImage gray_to_rgb(const GrayImage& img) {
    RgbImage out(img.width(), img.height());
    auto src = img.pixels();
    auto dst = out.values();
    for (std::size_t i = 0; i < src.size(); ++i) dst[3 * i] = dst[3 * i + 1] = dst[3 * i + 2] = src[i];
    return out;
}

GrayImage ink(const GrayImage& img) {
    GrayImage out(img.width(), img.height());
    std::transform(img.pixels().begin(), img.pixels().end(), out.pixels().begin(),
                   [](float v) { return 1.0f - v; });
    return out;
}

namespace {

std::uint8_t to_byte(float v) {
    const double c = std::clamp(static_cast<double>(v), 0.0, 1.0);
    return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

float from_byte(std::uint8_t b) { return static_cast<float>(b) / 255.0f; }

std::vector<std::uint8_t> encode(const std::vector<std::uint8_t>& bytes, std::size_t width,
                                 std::size_t height, png_uint_32 format) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(width);
    image.height = static_cast<png_uint_32>(height);
    image.format = format;

    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, bytes.data(), 0, nullptr)) {
        throw ImageIoError(std::string("png encode failed: ") + image.message);
    }
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, bytes.data(), 0, nullptr)) {
        throw ImageIoError(std::string("png encode failed: ") + image.message);
    }
    out.resize(size);
    return out;
}

std::vector<std::uint8_t> decode(std::span<const std::uint8_t> bytes, png_uint_32 format,
                                 std::size_t& width, std::size_t& height) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        throw ImageIoError(std::string("png decode failed: ") + image.message);
    }
    image.format = format;
    std::vector<std::uint8_t> out(PNG_IMAGE_SIZE(image));
    // A white background composites any alpha channel onto paper.
    png_color background{255, 255, 255};
    if (!png_image_finish_read(&image, &background, out.data(), 0, nullptr)) {
        png_image_free(&image);
        throw ImageIoError(std::string("png decode failed: ") + image.message);
    }
    width = image.width;
    height = image.height;
    return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ImageIoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ImageIoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ImageIoError("short write to " + path.string());
}

}  // namespace

GrayImage quantize8(const GrayImage& img) {
    GrayImage out(img.width(), img.height());
    std::transform(img.pixels().begin(), img.pixels().end(), out.pixels().begin(),
                   [](float v) { return from_byte(to_byte(v)); });
    return out;
}

std::vector<std::uint8_t> encode_png(const GrayImage& img) {
    std::vector<std::uint8_t> bytes(img.size());
    std::transform(img.pixels().begin(), img.pixels().end(), bytes.begin(), to_byte);
    return encode(bytes, img.width(), img.height(), PNG_FORMAT_GRAY);
}

std::vector<std::uint8_t> encode_png(const RgbImage& img) {
    std::vector<std::uint8_t> bytes(img.values().size());
    std::transform(img.values().begin(), img.values().end(), bytes.begin(), to_byte);
    return encode(bytes, img.width(), img.height(), PNG_FORMAT_RGB);
}

GrayImage decode_png_gray(std::span<const std::uint8_t> bytes) {
    std::size_t w = 0, h = 0;
    const auto raw = decode(bytes, PNG_FORMAT_GRAY, w, h);
    std::vector<float> data(raw.size());
    std::transform(raw.begin(), raw.end(), data.begin(), from_byte);
    return GrayImage(w, h, std::move(data));
}

RgbImage decode_png_rgb(std::span<const std::uint8_t> bytes) {
    std::size_t w = 0, h = 0;
    const auto raw = decode(bytes, PNG_FORMAT_RGB, w, h);
    std::vector<float> data(raw.size());
    std::transform(raw.begin(), raw.end(), data.begin(), from_byte);
    return RgbImage(w, h, std::move(data));
}

void write_png(const std::filesystem::path& path, const GrayImage& img) { write_file(path, encode_png(img)); }
void write_png(const std::filesystem::path& path, const RgbImage& img) { write_file(path, encode_png(img)); }
GrayImage read_png_gray(const std::filesystem::path& path) { return decode_png_gray(read_file(path)); }
RgbImage read_png_rgb(const std::filesystem::path& path) { return decode_png_rgb(read_file(path)); }

}  // namespace sketchguide
