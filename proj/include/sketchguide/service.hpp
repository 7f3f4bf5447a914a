// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

// WebSocket guidance service and headless generation.
//
// Client → server (JSON text frames, "type" selects the message):
//   open_session{session_id?} stroke_begin{} stroke_point{x,y,pressure}
//   stroke_end{canvas_png} set_prompt{text} set_style{id}
//   select_guidance{index} clear_background{} continue_drawing{}
// Server → client:
//   session_opened{session_id, config} guidance_set{round_id, images[]}
//   state_changed{mode, background?} round_skipped{round_id, similarity, probability}
//   error{code, message}
// Images are base64 PNG.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "sketchguide/config.hpp"

namespace sketchguide {

/// Synthetic or remote backend per config. A remote backend must answer a
/// handshake; when it does not, the config's fallback flag decides between
/// a synthetic backend and a BackendError.
std::shared_ptr<ModelBackend> make_backend(const ServiceConfig& config);

/// The config as echoed to clients in session_opened.
nlohmann::json config_echo(const ServiceConfig& config);

class GuidanceServer {
public:
    GuidanceServer(ServiceConfig config, std::shared_ptr<ModelBackend> backend);
    ~GuidanceServer();

    GuidanceServer(const GuidanceServer&) = delete;
    GuidanceServer& operator=(const GuidanceServer&) = delete;

    /// Binds and starts serving on background threads.
    void start();
    std::uint16_t port() const;
    /// Cancels in-flight rounds, flushes session logs, stops the listener.
    void shutdown();
    /// Blocks until SIGINT/SIGTERM, then shuts down.
    void run_until_signal();

    struct Impl;

private:
    std::unique_ptr<Impl> impl_;
};

struct GenerateOptions {
    std::vector<std::filesystem::path> inputs;
    std::string prompt;
    std::string style;
    std::filesystem::path out_dir = ".";
    ServiceConfig config;
};

/// Headless run: each input is resized to the working resolution and passed
/// through the skip gate in order; generated rounds write candidate_{i}.png
/// and guidance_{i}.png (into out_dir for one input, out_dir/input_{k} for
/// several). One metrics line per input goes to `metrics`. Returns the exit
/// code; unreadable inputs fail before anything is written.
int cli_generate(const GenerateOptions& options, std::ostream& metrics, std::ostream& errors);

}  // namespace sketchguide
