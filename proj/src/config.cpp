// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

#include "sketchguide/config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <variant>
#include <vector>

namespace sketchguide {

void ServiceConfig::finalize() {
    require(tau >= 0.0 && tau < 1.0, "tau must lie in [0,1)");
    require(step_count >= 1, "steps must be at least 1");
    backend.validate();
    pipeline.steps = TimestepPlan::uniform(total_steps, step_count, pipeline.strength);
    pipeline.validate(total_steps);
    (void)NoiseSchedule(total_steps, beta_start, beta_end);
}

SessionSettings ServiceConfig::session_settings() const {
    SessionSettings s;
    s.resolution = backend.working_resolution;
    s.styles = backend.styles;
    s.tau = tau;
    s.seed = seed;
    s.pipeline = pipeline;
    return s;
}

namespace {

using Value = std::variant<std::string, double, bool, std::vector<std::string>>;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

/// Reads a "quoted" string starting at text[pos] == '"'; advances pos past it.
std::string read_quoted(const std::string& text, std::size_t& pos, int line) {
    std::string out;
    for (++pos; pos < text.size(); ++pos) {
        const char c = text[pos];
        if (c == '"') {
            ++pos;
            return out;
        }
        if (c == '\\' && pos + 1 < text.size()) {
            const char n = text[++pos];
            out += n == 'n' ? '\n' : n == 't' ? '\t' : n;
        } else {
            out += c;
        }
    }
    throw ConfigError("line " + std::to_string(line) + ": unterminated string");
}

Value parse_value(const std::string& raw, int line) {
    if (raw.empty()) throw ConfigError("line " + std::to_string(line) + ": missing value");
    std::size_t pos = 0;
    if (raw[0] == '"') {
        std::string s = read_quoted(raw, pos, line);
        if (!trim(raw.substr(pos)).empty()) throw ConfigError("line " + std::to_string(line) + ": junk after string");
        return s;
    }
    if (raw[0] == '[') {
        std::vector<std::string> items;
        pos = 1;
        for (;;) {
            while (pos < raw.size() && (raw[pos] == ' ' || raw[pos] == '\t')) ++pos;
            if (pos < raw.size() && raw[pos] == ']') break;
            if (pos >= raw.size() || raw[pos] != '"') throw ConfigError("line " + std::to_string(line) + ": arrays hold strings only");
            items.push_back(read_quoted(raw, pos, line));
            while (pos < raw.size() && (raw[pos] == ' ' || raw[pos] == '\t')) ++pos;
            if (pos < raw.size() && raw[pos] == ',') {
                ++pos;
                continue;
            }
            if (pos < raw.size() && raw[pos] == ']') break;
            throw ConfigError("line " + std::to_string(line) + ": malformed array");
        }
        return items;
    }
    if (raw == "true") return true;
    if (raw == "false") return false;
    try {
        std::size_t used = 0;
        const double v = std::stod(raw, &used);
        if (used != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(line) + ": cannot parse value '" + raw + "'");
    }
}

/// Strips a trailing comment that is not inside a string.
std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

template <class T>
T expect(const Value& v, const std::string& key) {
    if (const auto* p = std::get_if<T>(&v)) return *p;
    throw ConfigError("key '" + key + "' has the wrong type");
}

std::uint64_t expect_count(const Value& v, const std::string& key) {
    const double d = expect<double>(v, key);
    if (d < 0 || d != static_cast<double>(static_cast<std::uint64_t>(d))) {
        throw ConfigError("key '" + key + "' must be a non-negative integer");
    }
    return static_cast<std::uint64_t>(d);
}

using Setter = std::function<void(ServiceConfig&, const Value&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"listen", [](ServiceConfig& c, const Value& v, const std::string& k) { c.listen = expect<std::string>(v, k); }},
        {"backend", [](ServiceConfig& c, const Value& v, const std::string& k) {
             const auto s = expect<std::string>(v, k);
             if (s == "synthetic") c.backend.kind = BackendKind::Synthetic;
             else if (s == "remote") c.backend.kind = BackendKind::Remote;
             else throw ConfigError("backend must be 'synthetic' or 'remote'");
         }},
        {"remote", [](ServiceConfig& c, const Value& v, const std::string& k) {
             auto parsed = RemoteEndpoint::parse(expect<std::string>(v, k));
             c.remote.host = parsed.host;
             c.remote.port = parsed.port;
         }},
        {"remote_timeout_ms", [](ServiceConfig& c, const Value& v, const std::string& k) { c.remote.timeout_ms = static_cast<int>(expect_count(v, k)); }},
        {"remote_max_in_flight", [](ServiceConfig& c, const Value& v, const std::string& k) { c.remote.max_in_flight = expect_count(v, k); }},
        {"remote_reconnect_attempts", [](ServiceConfig& c, const Value& v, const std::string& k) { c.remote.reconnect_attempts = static_cast<int>(expect_count(v, k)); }},
        {"fallback_to_synthetic", [](ServiceConfig& c, const Value& v, const std::string& k) { c.fallback_to_synthetic = expect<bool>(v, k); }},
        {"resolution", [](ServiceConfig& c, const Value& v, const std::string& k) { c.backend.working_resolution = expect_count(v, k); }},
        {"styles", [](ServiceConfig& c, const Value& v, const std::string& k) { c.backend.styles = expect<std::vector<std::string>>(v, k); }},
        {"tau", [](ServiceConfig& c, const Value& v, const std::string& k) { c.tau = expect<double>(v, k); }},
        {"seed", [](ServiceConfig& c, const Value& v, const std::string& k) { c.seed = expect_count(v, k); }},
        {"total_steps", [](ServiceConfig& c, const Value& v, const std::string& k) { c.total_steps = static_cast<int>(expect_count(v, k)); }},
        {"beta_start", [](ServiceConfig& c, const Value& v, const std::string& k) { c.beta_start = expect<double>(v, k); }},
        {"beta_end", [](ServiceConfig& c, const Value& v, const std::string& k) { c.beta_end = expect<double>(v, k); }},
        {"steps", [](ServiceConfig& c, const Value& v, const std::string& k) { c.step_count = static_cast<int>(expect_count(v, k)); }},
        {"strength", [](ServiceConfig& c, const Value& v, const std::string& k) { c.pipeline.strength = expect<double>(v, k); }},
        {"candidates", [](ServiceConfig& c, const Value& v, const std::string& k) { c.pipeline.num_candidates = expect_count(v, k); }},
        {"renoise", [](ServiceConfig& c, const Value& v, const std::string& k) { c.pipeline.renoise = expect<bool>(v, k); }},
        {"cfg", [](ServiceConfig& c, const Value& v, const std::string& k) { c.pipeline.guidance.mode = parse_cfg_mode(expect<std::string>(v, k)); }},
        {"guidance_scale", [](ServiceConfig& c, const Value& v, const std::string& k) { c.pipeline.guidance.scale = expect<double>(v, k); }},
        {"sigma_s", [](ServiceConfig& c, const Value& v, const std::string& k) { c.pipeline.filter.sigma_s = expect<double>(v, k); }},
        {"sigma_r", [](ServiceConfig& c, const Value& v, const std::string& k) { c.pipeline.filter.sigma_r = expect<double>(v, k); }},
        {"iterations", [](ServiceConfig& c, const Value& v, const std::string& k) { c.pipeline.filter.iterations = static_cast<int>(expect_count(v, k)); }},
        {"noise_cache", [](ServiceConfig& c, const Value& v, const std::string& k) { c.caches.noise = expect<bool>(v, k); }},
        {"scheduler_cache", [](ServiceConfig& c, const Value& v, const std::string& k) { c.caches.scheduler = expect<bool>(v, k); }},
        {"prompt_embed_cache", [](ServiceConfig& c, const Value& v, const std::string& k) { c.caches.prompt_embed = expect<bool>(v, k); }},
        {"data_dir", [](ServiceConfig& c, const Value& v, const std::string& k) { c.data_dir = expect<std::string>(v, k); }},
        {"workers", [](ServiceConfig& c, const Value& v, const std::string& k) { c.workers = expect_count(v, k); }},
    };
    return table;
}

}  // namespace

ServiceConfig parse_config(const std::string& text, ServiceConfig base) {
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string content = trim(strip_comment(line));
        if (content.empty()) continue;
        const auto eq = content.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(number) + ": expected key = value");
        const std::string key = trim(content.substr(0, eq));
        const auto it = setters().find(key);
        if (it == setters().end()) throw ConfigError("line " + std::to_string(number) + ": unknown key '" + key + "'");
        try {
            it->second(base, parse_value(trim(content.substr(eq + 1)), number), key);
        } catch (const ContractViolation& e) {
            throw ConfigError("line " + std::to_string(number) + ": " + e.what());
        }
    }
    return base;
}

ServiceConfig load_config(const std::filesystem::path& path, ServiceConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), std::move(base));
}

std::optional<std::filesystem::path> resolve_config_path(const std::optional<std::filesystem::path>& flag) {
    if (const char* env = std::getenv(kConfigEnv); env != nullptr && *env != '\0') return std::filesystem::path(env);
    return flag;
}

}  // namespace sketchguide
