// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <ostream>

#include <spdlog/spdlog.h>

#include "sketchguide/imaging.hpp"
#include "sketchguide/random.hpp"
#include "sketchguide/service.hpp"
#include "sketchguide/synthetic_backend.hpp"

namespace sketchguide {

std::shared_ptr<ModelBackend> make_backend(const ServiceConfig& config) {
    if (config.backend.kind == BackendKind::Synthetic) {
        return std::make_shared<SyntheticBackend>(config.seed, config.backend);
    }
    auto remote = std::make_shared<RemoteBackend>(config.remote, config.backend);
    try {
        remote->handshake();
        return remote;
    } catch (const BackendError& e) {
        if (!config.fallback_to_synthetic) throw;
        spdlog::warn("remote backend unavailable ({}); falling back to synthetic", e.what());
        return std::make_shared<SyntheticBackend>(config.seed, config.backend);
    }
}

nlohmann::json config_echo(const ServiceConfig& c) {
    return {{"backend", to_string(c.backend.kind)},
            {"resolution", c.backend.working_resolution},
            {"styles", c.backend.styles},
            {"tau", c.tau},
            {"seed", c.seed},
            {"steps", c.pipeline.steps.steps()},
            {"strength", c.pipeline.strength},
            {"candidates", c.pipeline.num_candidates},
            {"cfg", to_string(c.pipeline.guidance.mode)},
            {"guidance_scale", c.pipeline.guidance.scale},
            {"sigma_s", c.pipeline.filter.sigma_s},
            {"sigma_r", c.pipeline.filter.sigma_r},
            {"iterations", c.pipeline.filter.iterations}};
}

int cli_generate(const GenerateOptions& options, std::ostream& metrics, std::ostream& errors) {
    if (options.inputs.empty()) {
        errors << "generate: no input sketch given\n";
        return 2;
    }
    ServiceConfig config = options.config;
    try {
        config.finalize();
    } catch (const std::exception& e) {
        errors << "generate: invalid configuration: " << e.what() << '\n';
        return 2;
    }
    const std::string style = options.style.empty() ? config.backend.styles.front() : options.style;
    if (!config.backend.has_style(style)) {
        errors << "generate: unknown style '" << style << "'\n";
        return 2;
    }

    // Load everything up front so a bad input leaves no partial output.
    const std::size_t res = config.backend.working_resolution;
    std::vector<GrayImage> sketches;
    for (const auto& path : options.inputs) {
        try {
            sketches.push_back(quantize8(resize_bilinear(read_png_gray(path), res, res)));
        } catch (const std::exception& e) {
            errors << "generate: " << e.what() << '\n';
            return 1;
        }
    }

    std::shared_ptr<ModelBackend> backend;
    try {
        backend = make_backend(config);
    } catch (const std::exception& e) {
        errors << "generate: backend unavailable: " << e.what() << '\n';
        return 3;
    }
    SchedulerCaches caches(std::make_shared<NoiseSchedule>(config.total_steps, config.beta_start, config.beta_end),
                           config.caches);

    GateState gate = GateState::create(config.tau, config.seed);
    const std::string key = options.prompt + '\x1f' + style;
    std::uint64_t round_id = 0;
    for (std::size_t k = 0; k < sketches.size(); ++k) {
        auto outcome = evaluate(std::move(gate), sketches[k], key);
        gate = std::move(outcome.state);
        ++round_id;
        const std::string label = "input=" + std::to_string(k);
        if (outcome.decision.action == GateAction::Skip) {
            char buf[160];
            std::snprintf(buf, sizeof(buf), "round_id=%llu status=skipped similarity=%.6f probability=%.6f",
                          static_cast<unsigned long long>(round_id), outcome.decision.similarity,
                          outcome.decision.probability);
            metrics << label << ' ' << buf << '\n';
            continue;
        }

        GenerationRequest req;
        req.round_id = round_id;
        req.sketch = sketches[k];
        req.prompt = options.prompt;
        req.style = style;
        req.seed = hash_combine(config.seed, round_id);
        req.config = config.pipeline;
        try {
            const GenerationRound round = run_round(req, *backend, caches);
            const auto dir = sketches.size() == 1 ? options.out_dir : options.out_dir / ("input_" + std::to_string(k));
            std::filesystem::create_directories(dir);
            for (std::size_t i = 0; i < round.rgb_candidates.size(); ++i) {
                write_png(dir / ("candidate_" + std::to_string(i) + ".png"), round.rgb_candidates[i]);
                write_png(dir / ("guidance_" + std::to_string(i) + ".png"), round.guidance_sketches[i]);
            }
            metrics << metrics_line(round, label) << '\n';
        } catch (const std::exception& e) {
            errors << "generate: round " << round_id << " failed: " << e.what() << '\n';
            return 4;
        }
    }
    return 0;
}

}  // namespace sketchguide
