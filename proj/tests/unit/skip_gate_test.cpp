// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "sketchguide/imaging.hpp"
#include "sketchguide/skip_gate.hpp"
#include "test_support.hpp"

using namespace sketchguide;

namespace {

/// White canvas with a dark rectangle; disjoint rectangles give orthogonal ink.
GrayImage canvas_with_box(std::size_t x0, std::size_t x1) {
    GrayImage g(32, 32, 1.0f);
    for (std::size_t y = 4; y < 28; ++y) {
        for (std::size_t x = x0; x < x1; ++x) g.at(x, y) = 0.0f;
    }
    return g;
}

}  // namespace

TEST_SUITE("skip_gate") {
    TEST_CASE("probability is zero at the threshold") {
        for (double tau : {0.0, 0.3, 0.9, 0.99}) CHECK(skip_probability(tau, tau) == 0.0);
    }

    TEST_CASE("probability is one at full similarity") {
        for (double tau : {0.0, 0.5, 0.95}) CHECK(skip_probability(1.0, tau) == doctest::Approx(1.0).epsilon(1e-12));
    }

    TEST_CASE("x = 0.95 with tau = 0.9 gives 0.5") {
        CHECK(skip_probability(0.95, 0.9) == doctest::Approx(0.5).epsilon(1e-12));
    }

    TEST_CASE("probability clamps to zero below the threshold") {
        CHECK(skip_probability(0.2, 0.9) == 0.0);
    }

    TEST_CASE("tau outside [0,1) is rejected") {
        CHECK_THROWS_AS(skip_probability(0.5, 1.0), ContractViolation);
        CHECK_THROWS_AS(skip_probability(0.5, -0.1), ContractViolation);
        CHECK_THROWS_AS(GateState::create(1.0, 0), ContractViolation);
    }

    TEST_CASE("similarity is computed on ink") {
        const GrayImage a = canvas_with_box(2, 10);
        const GrayImage b = canvas_with_box(20, 30);
        CHECK(sketch_similarity(a, b) == 0.0);
        CHECK(sketch_similarity(a, a) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(sketch_similarity(GrayImage(32, 32, 1.0f), a) == 0.0);
        CHECK(sketch_similarity(a, b) == cosine_similarity(ink(a), ink(b)));
    }

    TEST_CASE("an empty reference always generates") {
        const auto out = evaluate(GateState::create(0.9, 1), canvas_with_box(2, 10), "p");
        CHECK(out.decision.action == GateAction::Generate);
        CHECK(out.decision.reason == GateReason::FirstInput);
        REQUIRE(out.state.reference.has_value());
        CHECK(*out.state.reference == canvas_with_box(2, 10));
        CHECK(out.state.last_prompt == "p");
    }

    TEST_CASE("an identical input with the same prompt always skips") {
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            auto first = evaluate(GateState::create(0.9, seed), canvas_with_box(2, 10), "p");
            const auto second = evaluate(std::move(first.state), canvas_with_box(2, 10), "p");
            CHECK(second.decision.action == GateAction::Skip);
            CHECK(second.decision.probability == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(second.decision.reason == GateReason::SampledSkip);
        }
    }

    TEST_CASE("an orthogonal input with the same prompt always generates") {
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            auto first = evaluate(GateState::create(0.9, seed), canvas_with_box(2, 10), "p");
            const auto second = evaluate(std::move(first.state), canvas_with_box(20, 30), "p");
            CHECK(second.decision.action == GateAction::Generate);
            CHECK(second.decision.probability == 0.0);
            CHECK(second.decision.reason == GateReason::SampledGenerate);
        }
    }

    TEST_CASE("a prompt change forces generation and updates the reference") {
        auto first = evaluate(GateState::create(0.0, 3), canvas_with_box(2, 10), "a");
        const auto second = evaluate(std::move(first.state), canvas_with_box(2, 10), "b");
        CHECK(second.decision.action == GateAction::Generate);
        CHECK(second.decision.reason == GateReason::PromptChanged);
        CHECK(second.state.last_prompt == "b");
    }

    TEST_CASE("the reference follows every input, skipped or not") {
        GateState s = GateState::create(0.0, 4);
        for (int k = 0; k < 20; ++k) {
            const GrayImage in = canvas_with_box(2, 10 + static_cast<std::size_t>(k % 5));
            s = evaluate(std::move(s), in, "p").state;
            CHECK(*s.reference == in);
        }
    }

    TEST_CASE("observe moves the reference without drawing randomness") {
        const GateState s = evaluate(GateState::create(0.9, 5), canvas_with_box(2, 10), "p").state;
        const GateState o = observe(s, canvas_with_box(3, 9));
        CHECK(o.rng == s.rng);
        CHECK(o.last_prompt == s.last_prompt);
        CHECK(*o.reference == canvas_with_box(3, 9));
    }

    TEST_CASE("decisions are reproducible from the seed") {
        auto run = [](std::uint64_t seed) {
            GateState s = GateState::create(0.5, seed);
            std::vector<GateAction> actions;
            for (int k = 0; k < 40; ++k) {
                auto out = evaluate(std::move(s), canvas_with_box(2, 10 + static_cast<std::size_t>(k % 7)), "p");
                actions.push_back(out.decision.action);
                s = std::move(out.state);
            }
            return actions;
        };
        CHECK(run(11) == run(11));
    }

    TEST_CASE("the sampled decision compares one uniform draw against p") {
        // Replays the gate's random stream independently.
        const GrayImage a = canvas_with_box(2, 12);
        const GrayImage b = canvas_with_box(2, 14);
        const double p = skip_probability(sketch_similarity(b, a), 0.5);
        REQUIRE(p > 0.0);
        REQUIRE(p < 1.0);
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            auto first = evaluate(GateState::create(0.5, seed), a, "p");
            const auto second = evaluate(std::move(first.state), b, "p");
            Rng replica(seed);
            const bool skip = replica.uniform() < p;
            CHECK((second.decision.action == GateAction::Skip) == skip);
        }
    }
}
