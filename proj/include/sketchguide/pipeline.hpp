// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

// One generation round: sketch → latent → noised candidate slots →
// stream-batched few-step denoising → decoded candidates → guidance sketches.

#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sketchguide/backend.hpp"
#include "sketchguide/image.hpp"
#include "sketchguide/scheduler.hpp"
#include "sketchguide/sketch_optimizer.hpp"

namespace sketchguide {

struct PipelineConfig {
    std::size_t num_candidates = 4;
    TimestepPlan steps = TimestepPlan::uniform(NoiseSchedule::kDefaultSteps, 4, 0.8);
    GuidanceConfig guidance;
    /// Fraction of the schedule applied to the encoded sketch; the plan starts
    /// at round(strength·T).
    double strength = 0.8;
    /// When false, the re-noising between steps uses zero noise.
    bool renoise = true;
    FilterParams filter;

    /// Plan of `step_count` uniform steps for `strength`.
    static PipelineConfig make(int step_count, double strength, int total_steps = NoiseSchedule::kDefaultSteps);

    void validate(int total_steps) const;
};

struct GenerationRequest {
    std::uint64_t round_id = 0;
    GrayImage sketch;
    std::string prompt;
    std::string style;
    std::uint64_t seed = 0;
    PipelineConfig config;
};

struct StageTimings {
    double queue_wait_ms = 0.0;
    double encode_ms = 0.0;
    double denoise_ms = 0.0;
    double decode_ms = 0.0;
    double optimize_ms = 0.0;

    double total_ms() const { return encode_ms + denoise_ms + decode_ms + optimize_ms; }
};

struct GenerationRound {
    GenerationRequest request;
    std::vector<RgbImage> rgb_candidates;
    std::vector<GrayImage> guidance_sketches;
    StageTimings timings;
};

/// key=value metrics for one round, single line.
std::string metrics_line(const GenerationRound& round, const std::string& label = {});

/// Raised by run_round when its cancel flag trips between denoising steps.
class RoundCancelled : public std::runtime_error {
public:
    RoundCancelled() : std::runtime_error("round cancelled") {}
};

/// One candidate's progress through the timestep plan.
struct SlotCursor {
    std::size_t slot = 0;
    Latent latent;
    /// Index of the next plan step; == plan size once finished.
    std::size_t position = 0;

    bool finished(const TimestepPlan& plan) const { return position >= plan.size(); }
};

struct StreamContext {
    ModelBackend& backend;
    SchedulerCaches& caches;
    const TimestepPlan& plan;
    const GuidanceConfig& guidance;
    const PromptEmbedding& cond;
    /// Required when guidance.mode is FULL.
    const PromptEmbedding* uncond = nullptr;
    std::uint64_t seed = 0;
    bool renoise = true;
};

/// Advances every unfinished slot by one plan step using a single
/// predict_noise call (unconditional copies first, then conditional, when
/// CFG is FULL). Slots may sit at different plan positions. Returns the
/// predictor batch size used.
std::size_t stream_batch_step(std::vector<SlotCursor>& slots, const StreamContext& ctx);

/// Runs the whole round. `cancel` is polled between denoising steps.
GenerationRound run_round(const GenerationRequest& request, ModelBackend& backend, SchedulerCaches& caches,
                          const std::atomic<bool>* cancel = nullptr);

enum class EnqueueResult { Accepted, Coalesced };

/// Latest-wins input queue for one session: at most one pending request; a
/// newer request replaces an unstarted one. At most one round runs at a time,
/// on the executor supplied at construction.
class InputQueue {
public:
    using Executor = std::function<void(std::function<void()>)>;
    /// Called on the executor with the dequeued request and its queue wait.
    using Runner = std::function<void(GenerationRequest, double queue_wait_ms)>;

    InputQueue(Executor executor, Runner runner);
    ~InputQueue();

    InputQueue(const InputQueue&) = delete;
    InputQueue& operator=(const InputQueue&) = delete;

    EnqueueResult enqueue(GenerationRequest request);

    /// Drops any pending request; returns whether one was dropped.
    bool discard_pending();
    /// Blocks until nothing is pending or running.
    void wait_idle();
    bool busy() const;

private:
    void drain();

    Executor executor_;
    Runner runner_;
    mutable std::mutex mutex_;
    std::condition_variable idle_;
    std::optional<GenerationRequest> pending_;
    std::chrono::steady_clock::time_point pending_since_;
    bool running_ = false;
};

}  // namespace sketchguide
