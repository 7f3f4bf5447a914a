// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

// Few-step denoising arithmetic: noise schedule, forward noising, CFG
// combination, consistency-style latent update, and the noise / scheduler /
// prompt-embedding caches.

#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <tuple>
#include <vector>

#include "sketchguide/image.hpp"

namespace sketchguide {

struct PromptEmbedding;
class ModelBackend;

/// Cumulative signal fractions ᾱ_0..ᾱ_T of a scaled-linear beta schedule:
/// β_t = (√β_start + (t-1)/(T-1)·(√β_end - √β_start))², ᾱ_t = Π(1-β_i), ᾱ_0 = 1.
class NoiseSchedule {
public:
    static constexpr int kDefaultSteps = 1000;
    static constexpr double kDefaultBetaStart = 0.00085;
    static constexpr double kDefaultBetaEnd = 0.012;

    NoiseSchedule(int total_steps = kDefaultSteps, double beta_start = kDefaultBetaStart,
                  double beta_end = kDefaultBetaEnd);

    /// Builds a schedule from an explicit ᾱ table (index 0 must be 1).
    static NoiseSchedule from_alpha_bar(std::vector<double> alpha_bar);

    int total_steps() const { return static_cast<int>(alpha_bar_.size()) - 1; }
    double alpha_bar(int t) const;
    const std::vector<double>& table() const { return alpha_bar_; }

private:
    struct Empty {};
    explicit NoiseSchedule(Empty) {}
    std::vector<double> alpha_bar_;
};

/// Strictly decreasing timesteps inside [1, T].
class TimestepPlan {
public:
    TimestepPlan() = default;
    explicit TimestepPlan(std::vector<int> steps, int total_steps);

    /// `count` evenly spaced steps from t_start = round(strength·T) down to
    /// t_start/count; duplicates from rounding collapse.
    static TimestepPlan uniform(int total_steps, int count, double strength);

    const std::vector<int>& steps() const { return steps_; }
    std::size_t size() const { return steps_.size(); }
    int front() const { return steps_.front(); }
    int operator[](std::size_t i) const { return steps_[i]; }

    friend bool operator==(const TimestepPlan&, const TimestepPlan&) = default;

private:
    std::vector<int> steps_;
};

/// t_start for an img2img strength in (0,1].
int start_timestep(int total_steps, double strength);

enum class CfgMode { None, Full };

struct GuidanceConfig {
    CfgMode mode = CfgMode::Full;
    double scale = 1.5;
};

const char* to_string(CfgMode mode);
CfgMode parse_cfg_mode(const std::string& text);

/// Per-timestep coefficients √ᾱ_t and √(1-ᾱ_t).
struct StepCoefficients {
    double signal = 1.0;
    double noise = 0.0;
};

StepCoefficients coefficients(const NoiseSchedule& schedule, int t);

// The arithmetic below takes coefficients explicitly so cached and uncached
// callers run the same floating-point operations.

/// √ᾱ_t·x0 + √(1-ᾱ_t)·noise
Latent add_noise(const Latent& x0, const Latent& noise, StepCoefficients c);
Latent add_noise(const Latent& x0, const Latent& noise, const NoiseSchedule& schedule, int t);

/// NONE → eps_cond; FULL → eps_uncond + s·(eps_cond - eps_uncond)
Latent cfg_combine(const Latent& eps_uncond, const Latent& eps_cond, const GuidanceConfig& cfg);

/// (x_t - √(1-ᾱ_t)·eps) / √ᾱ_t
Latent predict_x0(const Latent& x_t, const Latent& eps, StepCoefficients c);
Latent predict_x0(const Latent& x_t, const Latent& eps, const NoiseSchedule& schedule, int t);

/// Consistency-style update. With no next coefficients (final step) returns
/// the x0 estimate; otherwise re-noises it to the next timestep with
/// `fresh_noise`.
Latent step(const Latent& x_t, const Latent& eps, StepCoefficients current,
            std::optional<StepCoefficients> next, const Latent* fresh_noise);
Latent step(const Latent& x_t, const Latent& eps, const NoiseSchedule& schedule, int t,
            std::optional<int> t_next, const Latent* fresh_noise);

/// Deterministic standard-normal latent for a key.
Latent make_noise(std::size_t height, std::size_t width, std::uint64_t key);

/// Key for a candidate slot's noise. Stage 0 is the initial noising; stage k
/// is the fresh noise injected before plan step k.
struct NoiseKey {
    std::size_t slot = 0;
    std::uint64_t seed = 0;
    std::size_t stage = 0;
    std::size_t height = 0;
    std::size_t width = 0;

    auto operator<=>(const NoiseKey&) const = default;
    std::uint64_t digest() const;
};

struct CacheToggles {
    bool noise = true;
    bool scheduler = true;
    bool prompt_embed = true;

    friend bool operator==(const CacheToggles&, const CacheToggles&) = default;
};

/// The three caches shared across rounds. Readers proceed concurrently;
/// inserts take the exclusive lock. A lost insert race recomputes a value
/// that is bit-identical to the winner's, so duplicate work is harmless.
class SchedulerCaches {
public:
    explicit SchedulerCaches(std::shared_ptr<const NoiseSchedule> schedule, CacheToggles toggles = {});

    const NoiseSchedule& schedule() const { return *schedule_; }
    const CacheToggles& toggles() const { return toggles_; }

    std::shared_ptr<const Latent> noise(const NoiseKey& key);
    StepCoefficients coefficients(int t);
    std::shared_ptr<const PromptEmbedding> prompt_embed(ModelBackend& backend, const std::string& prompt,
                                                        const std::string& style);

    struct Stats {
        std::size_t noise_hits = 0, noise_misses = 0;
        std::size_t scheduler_hits = 0, scheduler_misses = 0;
        std::size_t embed_hits = 0, embed_misses = 0;
    };
    Stats stats() const;

private:
    struct Counters {
        std::atomic<std::size_t> noise_hits{0}, noise_misses{0};
        std::atomic<std::size_t> scheduler_hits{0}, scheduler_misses{0};
        std::atomic<std::size_t> embed_hits{0}, embed_misses{0};
    };

    std::shared_ptr<const NoiseSchedule> schedule_;
    CacheToggles toggles_;

    mutable std::shared_mutex mutex_;
    std::map<NoiseKey, std::shared_ptr<const Latent>> noise_;
    std::vector<std::optional<StepCoefficients>> coefficients_;
    std::map<std::pair<std::string, std::string>, std::shared_ptr<const PromptEmbedding>> embeds_;
    Counters counters_;
};

/// Convenience: the prompt-embedding lookup as a free function.
std::shared_ptr<const PromptEmbedding> get_prompt_embed(SchedulerCaches& caches, ModelBackend& backend,
                                                        const std::string& prompt, const std::string& style);

}  // namespace sketchguide
