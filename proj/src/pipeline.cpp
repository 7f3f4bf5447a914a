// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

#include "sketchguide/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <sstream>

#include <spdlog/spdlog.h>

#include "sketchguide/imaging.hpp"

namespace sketchguide {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

}  // namespace

PipelineConfig PipelineConfig::make(int step_count, double strength, int total_steps) {
    PipelineConfig c;
    c.strength = strength;
    c.steps = TimestepPlan::uniform(total_steps, step_count, strength);
    return c;
}

void PipelineConfig::validate(int total_steps) const {
    require(num_candidates >= 1, "PipelineConfig: num_candidates must be at least 1");
    require(strength > 0.0 && strength <= 1.0, "PipelineConfig: strength must lie in (0,1]");
    require(steps.size() >= 1, "PipelineConfig: empty timestep plan");
    require(steps.front() <= total_steps, "PipelineConfig: plan exceeds the schedule");
    require(steps.front() == start_timestep(total_steps, strength),
            "PipelineConfig: plan must start at the strength's timestep");
    require(guidance.scale >= 0.0, "PipelineConfig: guidance scale must be non-negative");
    filter.validate();
}

std::string metrics_line(const GenerationRound& round, const std::string& label) {
    const auto& t = round.timings;
    char buf[320];
    std::snprintf(buf, sizeof(buf),
                  "round_id=%llu status=generated candidates=%zu queue_wait_ms=%.3f encode_ms=%.3f "
                  "denoise_ms=%.3f decode_ms=%.3f optimize_ms=%.3f total_ms=%.3f",
                  static_cast<unsigned long long>(round.request.round_id), round.rgb_candidates.size(),
                  t.queue_wait_ms, t.encode_ms, t.denoise_ms, t.decode_ms, t.optimize_ms, t.total_ms());
    return label.empty() ? std::string(buf) : label + " " + buf;
}

std::size_t stream_batch_step(std::vector<SlotCursor>& slots, const StreamContext& ctx) {
    const bool full = ctx.guidance.mode == CfgMode::Full;
    require(!full || ctx.uncond != nullptr, "stream_batch_step: CFG FULL needs an unconditional embedding");

    std::vector<SlotCursor*> active;
    for (auto& s : slots) {
        if (!s.finished(ctx.plan)) active.push_back(&s);
    }
    if (active.empty()) return 0;

    std::vector<NoiseQuery> batch;
    batch.reserve(active.size() * (full ? 2 : 1));
    if (full) {
        for (auto* s : active) batch.push_back({&s->latent, ctx.plan[s->position], ctx.uncond});
    }
    for (auto* s : active) batch.push_back({&s->latent, ctx.plan[s->position], &ctx.cond});

    std::vector<Latent> eps = ctx.backend.predict_noise(batch);
    if (eps.size() != batch.size()) throw BackendError("predict_noise returned a different batch size");
    const std::size_t offset = full ? active.size() : 0;

    for (std::size_t i = 0; i < active.size(); ++i) {
        SlotCursor& s = *active[i];
        const Latent& cond_eps = eps[offset + i];
        if (!cond_eps.same_shape(s.latent)) throw BackendError("predict_noise changed the latent shape");
        const Latent guided = full ? cfg_combine(eps[i], cond_eps, ctx.guidance) : cond_eps;

        const int t = ctx.plan[s.position];
        const StepCoefficients current = ctx.caches.coefficients(t);
        const bool last = s.position + 1 == ctx.plan.size();
        if (last) {
            s.latent = step(s.latent, guided, current, std::nullopt, nullptr);
        } else {
            const StepCoefficients next = ctx.caches.coefficients(ctx.plan[s.position + 1]);
            std::shared_ptr<const Latent> fresh;
            if (ctx.renoise) {
                fresh = ctx.caches.noise({s.slot, ctx.seed, s.position + 1, s.latent.height(), s.latent.width()});
            } else {
                fresh = std::make_shared<const Latent>(s.latent.height(), s.latent.width());
            }
            s.latent = step(s.latent, guided, current, next, fresh.get());
        }
        ++s.position;
    }
    return batch.size();
}

GenerationRound run_round(const GenerationRequest& request, ModelBackend& backend, SchedulerCaches& caches,
                          const std::atomic<bool>* cancel) {
    const auto& cfg = request.config;
    cfg.validate(caches.schedule().total_steps());
    const std::size_t res = backend.descriptor().working_resolution;
    require(request.sketch.width() == res && request.sketch.height() == res,
            "run_round: sketch must be at the backend's working resolution");
    auto check_cancel = [&] {
        if (cancel != nullptr && cancel->load()) throw RoundCancelled();
    };

    GenerationRound round;
    round.request = request;

    auto t0 = Clock::now();
    const Latent encoded = backend.vae_encode(gray_to_rgb(request.sketch));
    const auto cond = caches.prompt_embed(backend, request.prompt, request.style);
    std::shared_ptr<const PromptEmbedding> uncond;
    if (cfg.guidance.mode == CfgMode::Full) uncond = caches.prompt_embed(backend, "", request.style);

    const StepCoefficients entry = caches.coefficients(cfg.steps.front());
    std::vector<SlotCursor> slots;
    slots.reserve(cfg.num_candidates);
    for (std::size_t i = 0; i < cfg.num_candidates; ++i) {
        const auto noise = caches.noise({i, request.seed, 0, encoded.height(), encoded.width()});
        slots.push_back({i, add_noise(encoded, *noise, entry), 0});
    }
    round.timings.encode_ms = elapsed_ms(t0);

    t0 = Clock::now();
    const StreamContext ctx{backend, caches, cfg.steps, cfg.guidance, *cond, uncond.get(), request.seed, cfg.renoise};
    for (std::size_t k = 0; k < cfg.steps.size(); ++k) {
        check_cancel();
        stream_batch_step(slots, ctx);
    }
    round.timings.denoise_ms = elapsed_ms(t0);

    t0 = Clock::now();
    round.rgb_candidates.reserve(slots.size());
    for (const auto& s : slots) round.rgb_candidates.push_back(backend.vae_decode(s.latent));
    round.timings.decode_ms = elapsed_ms(t0);
    check_cancel();

    t0 = Clock::now();
    round.guidance_sketches.reserve(slots.size());
    for (const auto& rgb : round.rgb_candidates) round.guidance_sketches.push_back(backend.extract_lines(rgb));
    // Candidates are independent; kernels inside optimize run serially
    // within each worker unless nested parallelism is enabled.
    const auto count = static_cast<std::ptrdiff_t>(round.guidance_sketches.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        auto& sketch = round.guidance_sketches[static_cast<std::size_t>(i)];
        sketch = optimize(std::move(sketch), cfg.filter);
    }
    round.timings.optimize_ms = elapsed_ms(t0);
    return round;
}

InputQueue::InputQueue(Executor executor, Runner runner)
    : executor_(std::move(executor)), runner_(std::move(runner)) {}

InputQueue::~InputQueue() {
    discard_pending();
    wait_idle();
}

EnqueueResult InputQueue::enqueue(GenerationRequest request) {
    bool start = false;
    EnqueueResult result = EnqueueResult::Accepted;
    {
        std::lock_guard lock(mutex_);
        if (pending_) result = EnqueueResult::Coalesced;
        pending_ = std::move(request);
        pending_since_ = Clock::now();
        if (!running_) {
            running_ = true;
            start = true;
        }
    }
    if (start) executor_([this] { drain(); });
    return result;
}

void InputQueue::drain() {
    for (;;) {
        GenerationRequest request;
        double waited = 0.0;
        {
            std::lock_guard lock(mutex_);
            if (!pending_) {
                running_ = false;
                idle_.notify_all();
                return;
            }
            request = std::move(*pending_);
            pending_.reset();
            waited = elapsed_ms(pending_since_);
        }
        try {
            runner_(std::move(request), waited);
        } catch (const std::exception& e) {
            // The runner owns error reporting; a throw must not wedge the queue.
            spdlog::error("input queue: round runner failed: {}", e.what());
        }
    }
}

bool InputQueue::discard_pending() {
    std::lock_guard lock(mutex_);
    const bool had = pending_.has_value();
    pending_.reset();
    return had;
}

void InputQueue::wait_idle() {
    std::unique_lock lock(mutex_);
    idle_.wait(lock, [&] { return !running_ && !pending_; });
}

bool InputQueue::busy() const {
    std::lock_guard lock(mutex_);
    return running_ || pending_.has_value();
}

}  // namespace sketchguide
