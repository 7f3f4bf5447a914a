// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

#include "sketchguide/scheduler.hpp"

#include <algorithm>
#include <cmath>

#include "sketchguide/backend.hpp"
#include "sketchguide/random.hpp"

namespace sketchguide {

NoiseSchedule::NoiseSchedule(int total_steps, double beta_start, double beta_end) {
    require(total_steps >= 1, "NoiseSchedule: total_steps must be at least 1");
    require(beta_start > 0.0 && beta_end >= beta_start && beta_end < 1.0,
            "NoiseSchedule: need 0 < beta_start <= beta_end < 1");
    alpha_bar_.resize(static_cast<std::size_t>(total_steps) + 1);
    alpha_bar_[0] = 1.0;
    const double lo = std::sqrt(beta_start);
    const double hi = std::sqrt(beta_end);
    double product = 1.0;
    for (int t = 1; t <= total_steps; ++t) {
        const double frac = total_steps == 1 ? 0.0 : static_cast<double>(t - 1) / (total_steps - 1);
        const double root = lo + frac * (hi - lo);
        product *= 1.0 - root * root;
        alpha_bar_[static_cast<std::size_t>(t)] = product;
    }
}

NoiseSchedule NoiseSchedule::from_alpha_bar(std::vector<double> alpha_bar) {
    require(alpha_bar.size() >= 2 && alpha_bar.front() == 1.0, "NoiseSchedule: alpha_bar[0] must be 1");
    for (std::size_t i = 1; i < alpha_bar.size(); ++i) {
        require(alpha_bar[i] > 0.0 && alpha_bar[i] < alpha_bar[i - 1],
                "NoiseSchedule: alpha_bar must be positive and strictly decreasing");
    }
    NoiseSchedule s{Empty{}};
    s.alpha_bar_ = std::move(alpha_bar);
    return s;
}

double NoiseSchedule::alpha_bar(int t) const {
    require(t >= 0 && t <= total_steps(), "NoiseSchedule: timestep out of range");
    return alpha_bar_[static_cast<std::size_t>(t)];
}

TimestepPlan::TimestepPlan(std::vector<int> steps, int total_steps) : steps_(std::move(steps)) {
    require(!steps_.empty(), "TimestepPlan: at least one step is required");
    for (std::size_t i = 0; i < steps_.size(); ++i) {
        require(steps_[i] >= 1 && steps_[i] <= total_steps, "TimestepPlan: steps must lie in [1,T]");
        require(i == 0 || steps_[i] < steps_[i - 1], "TimestepPlan: steps must be strictly decreasing");
    }
}

int start_timestep(int total_steps, double strength) {
    require(strength > 0.0 && strength <= 1.0, "strength must lie in (0,1]");
    const auto t = static_cast<int>(std::lround(strength * total_steps));
    return std::clamp(t, 1, total_steps);
}

TimestepPlan TimestepPlan::uniform(int total_steps, int count, double strength) {
    require(count >= 1, "TimestepPlan: count must be at least 1");
    const int t_start = start_timestep(total_steps, strength);
    std::vector<int> steps;
    for (int i = 0; i < count; ++i) {
        const auto t = static_cast<int>(std::lround(static_cast<double>(t_start) * (count - i) / count));
        const int clamped = std::max(t, 1);
        if (steps.empty() || clamped < steps.back()) steps.push_back(clamped);
    }
    return TimestepPlan(std::move(steps), total_steps);
}

const char* to_string(CfgMode mode) { return mode == CfgMode::None ? "none" : "full"; }

CfgMode parse_cfg_mode(const std::string& text) {
    if (text == "none") return CfgMode::None;
    if (text == "full") return CfgMode::Full;
    throw ContractViolation("cfg mode must be 'none' or 'full', got '" + text + "'");
}

StepCoefficients coefficients(const NoiseSchedule& schedule, int t) {
    const double ab = schedule.alpha_bar(t);
    return {std::sqrt(ab), std::sqrt(1.0 - ab)};
}

namespace {

void require_same_shape(const Latent& a, const Latent& b, const char* what) {
    require(a.same_shape(b), what);
}

}  // namespace

Latent add_noise(const Latent& x0, const Latent& noise, StepCoefficients c) {
    require_same_shape(x0, noise, "add_noise: shapes must match");
    Latent out(x0.height(), x0.width());
    auto a = x0.values();
    auto n = noise.values();
    auto o = out.values();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = c.signal * a[i] + c.noise * n[i];
    return out;
}

Latent add_noise(const Latent& x0, const Latent& noise, const NoiseSchedule& schedule, int t) {
    return add_noise(x0, noise, coefficients(schedule, t));
}

Latent cfg_combine(const Latent& eps_uncond, const Latent& eps_cond, const GuidanceConfig& cfg) {
    require_same_shape(eps_uncond, eps_cond, "cfg_combine: shapes must match");
    if (cfg.mode == CfgMode::None) return eps_cond;
    require(cfg.scale >= 0.0, "cfg_combine: guidance scale must be non-negative");
    // (1-s)·u + s·c is the same blend as u + s·(c-u) but exact at s=0 and s=1.
    const double s = cfg.scale;
    Latent out(eps_cond.height(), eps_cond.width());
    auto u = eps_uncond.values();
    auto c = eps_cond.values();
    auto o = out.values();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = (1.0 - s) * u[i] + s * c[i];
    return out;
}

Latent predict_x0(const Latent& x_t, const Latent& eps, StepCoefficients c) {
    require_same_shape(x_t, eps, "predict_x0: shapes must match");
    Latent out(x_t.height(), x_t.width());
    auto x = x_t.values();
    auto e = eps.values();
    auto o = out.values();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = (x[i] - c.noise * e[i]) / c.signal;
    return out;
}

Latent predict_x0(const Latent& x_t, const Latent& eps, const NoiseSchedule& schedule, int t) {
    return predict_x0(x_t, eps, coefficients(schedule, t));
}

Latent step(const Latent& x_t, const Latent& eps, StepCoefficients current,
            std::optional<StepCoefficients> next, const Latent* fresh_noise) {
    Latent x0 = predict_x0(x_t, eps, current);
    if (!next) return x0;
    require(fresh_noise != nullptr, "step: fresh noise is required before a non-final timestep");
    return add_noise(x0, *fresh_noise, *next);
}

Latent step(const Latent& x_t, const Latent& eps, const NoiseSchedule& schedule, int t,
            std::optional<int> t_next, const Latent* fresh_noise) {
    require(t >= 1 && t <= schedule.total_steps(), "step: timestep out of range");
    std::optional<StepCoefficients> next;
    if (t_next) {
        require(*t_next < t && *t_next >= 0, "step: next timestep must precede the current one");
        next = coefficients(schedule, *t_next);
    }
    return step(x_t, eps, coefficients(schedule, t), next, fresh_noise);
}

Latent make_noise(std::size_t height, std::size_t width, std::uint64_t key) {
    Latent out(height, width);
    Rng rng(key);
    for (double& v : out.values()) v = rng.gaussian();
    return out;
}

std::uint64_t NoiseKey::digest() const {
    std::uint64_t h = hash_combine(0x6e6f697365ULL, slot);
    h = hash_combine(h, seed);
    h = hash_combine(h, stage);
    h = hash_combine(h, height);
    return hash_combine(h, width);
}

SchedulerCaches::SchedulerCaches(std::shared_ptr<const NoiseSchedule> schedule, CacheToggles toggles)
    : schedule_(std::move(schedule)), toggles_(toggles) {
    require(schedule_ != nullptr, "SchedulerCaches: schedule is required");
    coefficients_.resize(static_cast<std::size_t>(schedule_->total_steps()) + 1);
}

std::shared_ptr<const Latent> SchedulerCaches::noise(const NoiseKey& key) {
    if (!toggles_.noise) return std::make_shared<const Latent>(make_noise(key.height, key.width, key.digest()));
    {
        std::shared_lock lock(mutex_);
        if (auto it = noise_.find(key); it != noise_.end()) {
            ++counters_.noise_hits;
            return it->second;
        }
    }
    ++counters_.noise_misses;
    auto value = std::make_shared<const Latent>(make_noise(key.height, key.width, key.digest()));
    std::unique_lock lock(mutex_);
    return noise_.emplace(key, std::move(value)).first->second;
}

StepCoefficients SchedulerCaches::coefficients(int t) {
    if (!toggles_.scheduler) return sketchguide::coefficients(*schedule_, t);
    require(t >= 0 && t <= schedule_->total_steps(), "SchedulerCaches: timestep out of range");
    const auto index = static_cast<std::size_t>(t);
    {
        std::shared_lock lock(mutex_);
        if (coefficients_[index]) {
            ++counters_.scheduler_hits;
            return *coefficients_[index];
        }
    }
    ++counters_.scheduler_misses;
    const StepCoefficients value = sketchguide::coefficients(*schedule_, t);
    std::unique_lock lock(mutex_);
    coefficients_[index] = value;
    return value;
}

std::shared_ptr<const PromptEmbedding> SchedulerCaches::prompt_embed(ModelBackend& backend,
                                                                     const std::string& prompt,
                                                                     const std::string& style) {
    if (!toggles_.prompt_embed) return std::make_shared<const PromptEmbedding>(backend.encode_prompt(prompt, style));
    const auto key = std::make_pair(prompt, style);
    {
        std::shared_lock lock(mutex_);
        if (auto it = embeds_.find(key); it != embeds_.end()) {
            ++counters_.embed_hits;
            return it->second;
        }
    }
    ++counters_.embed_misses;
    auto value = std::make_shared<const PromptEmbedding>(backend.encode_prompt(prompt, style));
    std::unique_lock lock(mutex_);
    return embeds_.emplace(key, std::move(value)).first->second;
}

SchedulerCaches::Stats SchedulerCaches::stats() const {
    return {counters_.noise_hits.load(),     counters_.noise_misses.load(),
            counters_.scheduler_hits.load(), counters_.scheduler_misses.load(),
            counters_.embed_hits.load(),     counters_.embed_misses.load()};
}

std::shared_ptr<const PromptEmbedding> get_prompt_embed(SchedulerCaches& caches, ModelBackend& backend,
                                                        const std::string& prompt, const std::string& style) {
    return caches.prompt_embed(backend, prompt, style);
}

}  // namespace sketchguide
