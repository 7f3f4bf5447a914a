// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "sketchguide/config.hpp"
#include "sketchguide/imaging.hpp"
#include "sketchguide/service.hpp"
#include "test_support.hpp"

using namespace sketchguide;

TEST_SUITE("config") {
    TEST_CASE("defaults") {
        ServiceConfig c;
        c.finalize();
        CHECK(c.backend.kind == BackendKind::Synthetic);
        CHECK(c.backend.working_resolution == 512);
        CHECK(c.tau == kDefaultTau);
        CHECK(c.pipeline.num_candidates == 4);
        CHECK(c.pipeline.steps.steps() == std::vector<int>{800, 600, 400, 200});
        CHECK(c.pipeline.guidance.mode == CfgMode::Full);
        CHECK(c.pipeline.filter.sigma_s == 8.0);
        CHECK(c.pipeline.filter.sigma_r == 0.1);
        CHECK(c.pipeline.filter.iterations == 3);
    }

    TEST_CASE("every value type parses") {
        const ServiceConfig c = parse_config(R"(
# comment line
backend = "remote"          # trailing comment
remote = "10.0.0.5:9000"
resolution = 256
styles = ["ink", "anime # not a comment"]
tau = 0.5
seed = 12
steps = 2
strength = 0.6
candidates = 2
cfg = "none"
guidance_scale = 3
renoise = false
sigma_s = 4.5
sigma_r = 0.25
iterations = 2
noise_cache = false
data_dir = "/tmp/x"
workers = 3
)");
        CHECK(c.backend.kind == BackendKind::Remote);
        CHECK(c.remote.host == "10.0.0.5");
        CHECK(c.remote.port == 9000);
        CHECK(c.backend.working_resolution == 256);
        CHECK(c.backend.styles == std::vector<std::string>{"ink", "anime # not a comment"});
        CHECK(c.tau == 0.5);
        CHECK(c.seed == 12);
        CHECK(c.step_count == 2);
        CHECK(c.pipeline.strength == 0.6);
        CHECK(c.pipeline.num_candidates == 2);
        CHECK(c.pipeline.guidance.mode == CfgMode::None);
        CHECK(c.pipeline.guidance.scale == 3.0);
        CHECK_FALSE(c.pipeline.renoise);
        CHECK(c.pipeline.filter.sigma_s == 4.5);
        CHECK(c.pipeline.filter.sigma_r == 0.25);
        CHECK(c.pipeline.filter.iterations == 2);
        CHECK_FALSE(c.caches.noise);
        CHECK(c.caches.scheduler);
        CHECK(c.data_dir == "/tmp/x");
        CHECK(c.workers == 3);
    }

    TEST_CASE("finalize rebuilds the plan") {
        ServiceConfig c = parse_config("steps = 2\nstrength = 0.6\n");
        c.finalize();
        CHECK(c.pipeline.steps.steps() == std::vector<int>{600, 300});
    }

    TEST_CASE("later text overrides a base config") {
        const ServiceConfig base = parse_config("tau = 0.3\nseed = 5\n");
        const ServiceConfig c = parse_config("seed = 6\n", base);
        CHECK(c.tau == 0.3);
        CHECK(c.seed == 6);
    }

    TEST_CASE("unknown keys are rejected") {
        CHECK_THROWS_AS(parse_config("colour = \"red\"\n"), ConfigError);
    }

    TEST_CASE("malformed lines and values are rejected") {
        CHECK_THROWS_AS(parse_config("tau\n"), ConfigError);
        CHECK_THROWS_AS(parse_config("tau = \n"), ConfigError);
        CHECK_THROWS_AS(parse_config("tau = \"high\"\n"), ConfigError);
        CHECK_THROWS_AS(parse_config("backend = \"gpu\"\n"), ConfigError);
        CHECK_THROWS_AS(parse_config("listen = \"unterminated\n"), ConfigError);
        CHECK_THROWS_AS(parse_config("styles = [1, 2]\n"), ConfigError);
        CHECK_THROWS_AS(parse_config("seed = -1\n"), ConfigError);
        CHECK_THROWS_AS(parse_config("seed = 1.5\n"), ConfigError);
        CHECK_THROWS_AS(parse_config("cfg = \"half\"\n"), ConfigError);
        CHECK_THROWS_AS(parse_config("renoise = yes\n"), ConfigError);
    }

    TEST_CASE("finalize enforces ranges") {
        for (const char* text : {"tau = 1.0", "steps = 0", "strength = 0", "strength = 1.5", "candidates = 0",
                                 "sigma_r = 0", "iterations = 0", "resolution = 100", "guidance_scale = -1"}) {
            CAPTURE(text);
            bool threw = false;
            try {
                parse_config(text).finalize();
            } catch (const std::exception&) {
                threw = true;
            }
            CHECK(threw);
        }
    }

    TEST_CASE("config files load") {
        testing::TempDir dir("cfg");
        {
            std::ofstream out(dir.path() / "a.toml");
            out << "seed = 99\n";
        }
        CHECK(load_config(dir.path() / "a.toml").seed == 99);
        CHECK_THROWS_AS(load_config(dir.path() / "missing.toml"), ConfigError);
    }

    TEST_CASE("the environment variable wins over the flag") {
        ::unsetenv(kConfigEnv);
        CHECK(resolve_config_path(std::filesystem::path("flag.toml")) == std::filesystem::path("flag.toml"));
        CHECK_FALSE(resolve_config_path(std::nullopt).has_value());
        ::setenv(kConfigEnv, "env.toml", 1);
        CHECK(resolve_config_path(std::filesystem::path("flag.toml")) == std::filesystem::path("env.toml"));
        CHECK(resolve_config_path(std::nullopt) == std::filesystem::path("env.toml"));
        ::unsetenv(kConfigEnv);
    }

    TEST_CASE("remote addresses parse") {
        const RemoteEndpoint e = RemoteEndpoint::parse("example.org:1234");
        CHECK(e.host == "example.org");
        CHECK(e.port == 1234);
        CHECK_THROWS(RemoteEndpoint::parse("nohost"));
        CHECK_THROWS(RemoteEndpoint::parse("h:70000"));
    }

    TEST_CASE("the config echo lists the effective settings") {
        ServiceConfig c = parse_config("steps = 2\n");
        c.finalize();
        const auto echo = config_echo(c);
        CHECK(echo.at("backend") == "synthetic");
        CHECK(echo.at("steps").get<std::vector<int>>() == std::vector<int>{800, 400});
        CHECK(echo.at("candidates") == 4);
        CHECK(echo.at("sigma_r") == 0.1);
    }
}

TEST_SUITE("cli") {
    namespace {
    ServiceConfig small_config() {
        ServiceConfig c;
        c.backend.working_resolution = 64;
        return c;
    }

    std::filesystem::path write_sketch(const std::filesystem::path& dir, const std::string& name, std::uint64_t seed) {
        const auto path = dir / name;
        write_png(path, testing::line_drawing(96, seed));
        return path;
    }
    }  // namespace

    TEST_CASE("one input writes four candidates and four guidance sketches") {
        testing::TempDir dir("cli");
        GenerateOptions o;
        o.inputs = {write_sketch(dir.path(), "in.png", 1)};
        o.prompt = "a castle";
        o.out_dir = dir.path() / "out";
        o.config = small_config();
        std::ostringstream metrics, errors;
        REQUIRE(cli_generate(o, metrics, errors) == 0);
        for (int i = 0; i < 4; ++i) {
            const RgbImage c = read_png_rgb(o.out_dir / ("candidate_" + std::to_string(i) + ".png"));
            const GrayImage g = read_png_gray(o.out_dir / ("guidance_" + std::to_string(i) + ".png"));
            CHECK(c.width() == 64);
            CHECK(g.width() == 64);
        }
        CHECK(metrics.str().find("status=generated") != std::string::npos);
        CHECK(errors.str().empty());
    }

    TEST_CASE("a missing input fails before anything is written") {
        testing::TempDir dir("cli");
        GenerateOptions o;
        o.inputs = {write_sketch(dir.path(), "a.png", 1), dir.path() / "missing.png"};
        o.out_dir = dir.path() / "out";
        o.config = small_config();
        std::ostringstream metrics, errors;
        CHECK(cli_generate(o, metrics, errors) != 0);
        CHECK_FALSE(std::filesystem::exists(o.out_dir));
        CHECK(metrics.str().empty());
        CHECK_FALSE(errors.str().empty());
    }

    TEST_CASE("no inputs, a bad style or a bad config are errors") {
        testing::TempDir dir("cli");
        std::ostringstream metrics, errors;
        GenerateOptions o;
        o.out_dir = dir.path() / "out";
        o.config = small_config();
        CHECK(cli_generate(o, metrics, errors) == 2);
        o.inputs = {write_sketch(dir.path(), "a.png", 1)};
        o.style = "cubist";
        CHECK(cli_generate(o, metrics, errors) == 2);
        o.style.clear();
        o.config.tau = 2.0;
        CHECK(cli_generate(o, metrics, errors) == 2);
        CHECK_FALSE(std::filesystem::exists(o.out_dir));
    }

    TEST_CASE("with tau 0 a repeated input is skipped") {
        testing::TempDir dir("cli");
        const auto in = write_sketch(dir.path(), "a.png", 1);
        GenerateOptions o;
        o.inputs = {in, in};
        o.out_dir = dir.path() / "out";
        o.config = small_config();
        o.config.tau = 0.0;
        std::ostringstream metrics, errors;
        REQUIRE(cli_generate(o, metrics, errors) == 0);
        std::istringstream lines(metrics.str());
        std::string first, second;
        std::getline(lines, first);
        std::getline(lines, second);
        CHECK(first.find("input=0 round_id=1 status=generated") == 0);
        CHECK(second.find("input=1 round_id=2 status=skipped") == 0);
        CHECK(std::filesystem::exists(o.out_dir / "input_0" / "guidance_0.png"));
        CHECK_FALSE(std::filesystem::exists(o.out_dir / "input_1"));
    }

    TEST_CASE("generation is reproducible") {
        testing::TempDir dir("cli");
        const auto in = write_sketch(dir.path(), "a.png", 2);
        auto run = [&](const std::string& sub) {
            GenerateOptions o;
            o.inputs = {in};
            o.prompt = "p";
            o.out_dir = dir.path() / sub;
            o.config = small_config();
            std::ostringstream metrics, errors;
            REQUIRE(cli_generate(o, metrics, errors) == 0);
            return read_png_gray(o.out_dir / "guidance_3.png");
        };
        CHECK(run("a") == run("b"));
    }

    TEST_CASE("an unreachable remote backend fails unless fallback is on") {
        testing::TempDir dir("cli");
        GenerateOptions o;
        o.inputs = {write_sketch(dir.path(), "a.png", 1)};
        o.out_dir = dir.path() / "out";
        o.config = small_config();
        o.config.backend.kind = BackendKind::Remote;
        o.config.remote = RemoteEndpoint::parse("127.0.0.1:1");
        o.config.remote.timeout_ms = 500;
        o.config.remote.reconnect_attempts = 0;
        std::ostringstream metrics, errors;
        CHECK(cli_generate(o, metrics, errors) == 3);
        o.config.fallback_to_synthetic = true;
        CHECK(cli_generate(o, metrics, errors) == 0);
    }
}
