// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "sketchguide/image.hpp"
#include "sketchguide/random.hpp"

namespace sketchguide {

/// Skip threshold default; strokes on a shared canvas keep similarity near 1.
inline constexpr double kDefaultTau = 0.95;

/// max(0, (x - tau) / (1 - tau)). Requires 0 <= tau < 1.
double skip_probability(double similarity, double tau);

/// Similarity the gate compares: cosine over stroke coverage (1 - intensity),
/// so an untouched white canvas has zero norm.
double sketch_similarity(const GrayImage& a, const GrayImage& b);

struct GateState {
    std::optional<GrayImage> reference;
    double tau = kDefaultTau;
    Rng rng{0};
    std::string last_prompt;

    static GateState create(double tau, std::uint64_t seed);

    friend bool operator==(const GateState&, const GateState&) = default;
};

enum class GateAction { Skip, Generate };
enum class GateReason { FirstInput, PromptChanged, SampledSkip, SampledGenerate };

struct GateDecision {
    GateAction action = GateAction::Generate;
    double similarity = 0.0;
    double probability = 0.0;
    GateReason reason = GateReason::FirstInput;
};

struct GateOutcome {
    GateDecision decision;
    GateState state;
};

/// Decides whether this stroke-end generates. The returned state always holds
/// reference = input and last_prompt = prompt, whatever the decision.
GateOutcome evaluate(GateState state, const GrayImage& input, std::string_view prompt);

/// Advances the reference without deciding (used while generation is paused).
GateState observe(GateState state, const GrayImage& input);

const char* to_string(GateAction action);
const char* to_string(GateReason reason);

}  // namespace sketchguide
