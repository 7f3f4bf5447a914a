// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

// Portable deterministic randomness and content hashing. The standard
// library's distributions are implementation-defined, so every value that
// must be reproducible across platforms is drawn through these helpers.

#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace sketchguide {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) {
    return splitmix64(seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

/// FNV-1a over raw bytes.
std::uint64_t hash_bytes(std::span<const std::byte> bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t hash_string(std::string_view text, std::uint64_t seed = 0xcbf29ce484222325ULL);

/// Splitmix64 stream. Satisfies UniformRandomBitGenerator.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0,1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (one value per call).
    double gaussian();

    std::uint64_t state() const { return state_; }

    friend bool operator==(const Rng&, const Rng&) = default;

private:
    std::uint64_t state_;
};

}  // namespace sketchguide
