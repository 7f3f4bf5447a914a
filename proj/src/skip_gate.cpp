// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

#include "sketchguide/skip_gate.hpp"

#include <algorithm>

#include "sketchguide/imaging.hpp"

namespace sketchguide {

double skip_probability(double similarity, double tau) {
    require(tau >= 0.0 && tau < 1.0, "skip_probability: tau must lie in [0,1)");
    return std::max(0.0, (similarity - tau) / (1.0 - tau));
}

double sketch_similarity(const GrayImage& a, const GrayImage& b) {
    return cosine_similarity(ink(a), ink(b));
}

GateState GateState::create(double tau, std::uint64_t seed) {
    require(tau >= 0.0 && tau < 1.0, "GateState: tau must lie in [0,1)");
    GateState s;
    s.tau = tau;
    s.rng = Rng(seed);
    return s;
}

GateOutcome evaluate(GateState state, const GrayImage& input, std::string_view prompt) {
    GateDecision decision;
    if (!state.reference) {
        decision = {GateAction::Generate, 0.0, 0.0, GateReason::FirstInput};
    } else if (prompt != state.last_prompt) {
        decision = {GateAction::Generate, sketch_similarity(input, *state.reference), 0.0,
                    GateReason::PromptChanged};
    } else {
        const double x = sketch_similarity(input, *state.reference);
        const double p = skip_probability(x, state.tau);
        const double u = state.rng.uniform();
        const bool skip = u < p;
        decision = {skip ? GateAction::Skip : GateAction::Generate, x, p,
                    skip ? GateReason::SampledSkip : GateReason::SampledGenerate};
    }
    state.reference = input;
    state.last_prompt = std::string(prompt);
    return {decision, std::move(state)};
}

GateState observe(GateState state, const GrayImage& input) {
    state.reference = input;
    return state;
}

const char* to_string(GateAction action) {
    return action == GateAction::Skip ? "SKIP" : "GENERATE";
}

const char* to_string(GateReason reason) {
    switch (reason) {
        case GateReason::FirstInput: return "FIRST_INPUT";
        case GateReason::PromptChanged: return "PROMPT_CHANGED";
        case GateReason::SampledSkip: return "SAMPLED_SKIP";
        case GateReason::SampledGenerate: return "SAMPLED_GENERATE";
    }
    return "UNKNOWN";
}

}  // namespace sketchguide
