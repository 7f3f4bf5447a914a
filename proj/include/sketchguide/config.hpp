// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "sketchguide/backend.hpp"
#include "sketchguide/pipeline.hpp"
#include "sketchguide/remote_backend.hpp"
#include "sketchguide/session.hpp"
#include "sketchguide/sketch_optimizer.hpp"

namespace sketchguide {

/// Environment variable naming the config file; wins over --config.
inline constexpr const char* kConfigEnv = "GUIDANCE_CONFIG";

struct ServiceConfig {
    std::string listen = "127.0.0.1:8765";
    BackendDescriptor backend;
    RemoteEndpoint remote;
    bool fallback_to_synthetic = false;
    double tau = kDefaultTau;
    std::uint64_t seed = 0;
    int total_steps = NoiseSchedule::kDefaultSteps;
    double beta_start = NoiseSchedule::kDefaultBetaStart;
    double beta_end = NoiseSchedule::kDefaultBetaEnd;
    int step_count = 4;
    PipelineConfig pipeline;
    CacheToggles caches;
    std::filesystem::path data_dir = "sketchguide-data";
    /// 0 = hardware concurrency.
    std::size_t workers = 0;

    /// Rebuilds pipeline.steps from step_count/strength and checks every
    /// invariant.
    void finalize();
    SessionSettings session_settings() const;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses `key = value` lines. Values: "strings", numbers, true/false, and
/// ["string", ...] arrays. '#' starts a comment. Unknown keys are errors.
ServiceConfig parse_config(const std::string& text, ServiceConfig base = {});
ServiceConfig load_config(const std::filesystem::path& path, ServiceConfig base = {});

/// The config path to use: $GUIDANCE_CONFIG if set, else `flag`.
std::optional<std::filesystem::path> resolve_config_path(const std::optional<std::filesystem::path>& flag);

}  // namespace sketchguide
