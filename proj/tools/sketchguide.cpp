// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <optional>
#include <sstream>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "sketchguide/service.hpp"

namespace {

struct Overrides {
    std::optional<std::string> backend, remote, cfg;
    std::optional<double> tau, guidance_scale, sigma_s, sigma_r;
    std::optional<std::uint64_t> seed;
    std::optional<int> steps, iterations;
};

void add_flags(CLI::App& app, Overrides& o, std::optional<std::string>& config) {
    app.add_option("--config", config, "Config file (GUIDANCE_CONFIG wins when set)");
    app.add_option("--backend", o.backend, "synthetic|remote");
    app.add_option("--remote", o.remote, "Remote backend address host:port");
    app.add_option("--tau", o.tau, "Skip-gate threshold");
    app.add_option("--seed", o.seed, "Base seed");
    app.add_option("--steps", o.steps, "Denoising steps per round");
    app.add_option("--guidance-scale", o.guidance_scale, "Classifier-free guidance scale");
    app.add_option("--cfg", o.cfg, "none|full");
    app.add_option("--sigma-s", o.sigma_s, "Sketch filter spatial sigma");
    app.add_option("--sigma-r", o.sigma_r, "Sketch filter range sigma");
    app.add_option("--iterations", o.iterations, "Sketch filter iterations");
}

// Flags are applied as config lines so they share the config file's checks.
std::string override_text(const Overrides& o) {
    std::ostringstream out;
    out.precision(17);
    const auto quoted = [](const std::string& s) { return '"' + s + '"'; };
    if (o.backend) out << "backend = " << quoted(*o.backend) << '\n';
    if (o.remote) out << "remote = " << quoted(*o.remote) << '\n';
    if (o.cfg) out << "cfg = " << quoted(*o.cfg) << '\n';
    if (o.tau) out << "tau = " << *o.tau << '\n';
    if (o.guidance_scale) out << "guidance_scale = " << *o.guidance_scale << '\n';
    if (o.sigma_s) out << "sigma_s = " << *o.sigma_s << '\n';
    if (o.sigma_r) out << "sigma_r = " << *o.sigma_r << '\n';
    if (o.seed) out << "seed = " << *o.seed << '\n';
    if (o.steps) out << "steps = " << *o.steps << '\n';
    if (o.iterations) out << "iterations = " << *o.iterations << '\n';
    return out.str();
}

sketchguide::ServiceConfig build_config(const Overrides& o, const std::optional<std::string>& flag) {
    using namespace sketchguide;
    ServiceConfig config;
    std::optional<std::filesystem::path> flag_path;
    if (flag) flag_path = *flag;
    if (auto path = resolve_config_path(flag_path)) config = load_config(*path);
    config = parse_config(override_text(o), config);
    config.finalize();
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Real-time drawing guidance engine"};
    app.require_subcommand(1);

    Overrides overrides;
    std::optional<std::string> config_flag;
    std::vector<std::string> inputs;
    std::string prompt;
    std::string style;
    std::string out_dir = ".";
    std::optional<std::string> listen;
    std::optional<std::string> data_dir;

    auto* generate = app.add_subcommand("generate", "Run the pipeline on sketch PNGs and write results");
    generate->add_option("inputs", inputs, "Input sketch PNGs, gated in order")->required();
    generate->add_option("--prompt", prompt, "Text prompt");
    generate->add_option("--style", style, "Style id");
    generate->add_option("--out", out_dir, "Output directory");
    add_flags(*generate, overrides, config_flag);

    auto* serve = app.add_subcommand("serve", "Run the WebSocket guidance service");
    serve->add_option("--listen", listen, "host:port to bind");
    serve->add_option("--data-dir", data_dir, "Session persistence directory");
    add_flags(*serve, overrides, config_flag);

    CLI11_PARSE(app, argc, argv);

    sketchguide::ServiceConfig config;
    try {
        config = build_config(overrides, config_flag);
    } catch (const std::exception& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    }

    if (generate->parsed()) {
        sketchguide::GenerateOptions options;
        for (const auto& in : inputs) options.inputs.emplace_back(in);
        options.prompt = prompt;
        options.style = style;
        options.out_dir = out_dir;
        options.config = config;
        return sketchguide::cli_generate(options, std::cout, std::cerr);
    }

    if (listen) config.listen = *listen;
    if (data_dir) config.data_dir = *data_dir;
    try {
        sketchguide::GuidanceServer server(config, sketchguide::make_backend(config));
        server.start();
        server.run_until_signal();
    } catch (const std::exception& e) {
        spdlog::error("serve: {}", e.what());
        return 1;
    }
    return 0;
}
