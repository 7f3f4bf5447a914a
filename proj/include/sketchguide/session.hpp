// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

// The drawing-session automaton.
//
//   ACTIVE ──select_guidance──▶ PAUSED_BG ──clear_background──▶ PAUSED_CLEARED
//     ▲                           │  ▲ select_guidance               │
//     └──────continue_drawing─────┴──┴───────────────────────────────┘
//
// Only ACTIVE stroke-ends (through the skip gate) and conditioning changes
// produce generation requests. Transitions are pure: replaying the same
// events from the same initial state reproduces the state exactly.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "sketchguide/image.hpp"
#include "sketchguide/pipeline.hpp"
#include "sketchguide/skip_gate.hpp"

namespace sketchguide {

enum class SessionMode { Active, PausedBackground, PausedCleared };

const char* to_string(SessionMode mode);

struct GuidanceSlot {
    std::size_t index = 0;
    GrayImage sketch;
    std::uint64_t round_id = 0;

    friend bool operator==(const GuidanceSlot&, const GuidanceSlot&) = default;
};

inline constexpr std::size_t kGuidanceSlots = 4;

/// Fixed per-session parameters; not part of the event stream.
struct SessionSettings {
    std::size_t resolution = 512;
    std::vector<std::string> styles{"anime", "realistic"};
    double tau = kDefaultTau;
    std::uint64_t seed = 0;
    PipelineConfig pipeline;
};

struct SessionState {
    SessionMode mode = SessionMode::Active;
    GrayImage canvas;
    std::optional<GrayImage> background;
    std::vector<GuidanceSlot> slots;
    std::string prompt;
    std::string style;
    GateState gate;
    /// Round id of the newest emitted request (0 before the first).
    std::uint64_t latest_round_id = 0;
    /// Ids handed out so far, including skipped stroke-ends.
    std::uint64_t issued_round_ids = 0;
    /// A prompt or style change arrived while paused.
    bool conditioning_dirty = false;

    static SessionState initial(const SessionSettings& settings);

    friend bool operator==(const SessionState&, const SessionState&) = default;
};

// Events. Canvas and sketches are stored at 8-bit precision on entry so a
// PNG-encoded event log replays exactly.
struct StrokeEnd { GrayImage canvas; };
struct SelectGuidance { std::size_t index = 0; };
struct ClearBackground {};
struct ContinueDrawing {};
struct SetPrompt { std::string text; };
struct SetStyle { std::string id; };
struct RoundCompleted {
    std::uint64_t round_id = 0;
    std::vector<GrayImage> sketches;
};

using SessionEvent =
    std::variant<StrokeEnd, SelectGuidance, ClearBackground, ContinueDrawing, SetPrompt, SetStyle, RoundCompleted>;

const char* event_name(const SessionEvent& event);

struct SessionError {
    std::string code;
    std::string message;
};

struct SkippedRound {
    std::uint64_t round_id = 0;
    GateDecision decision;
};

struct Effects {
    std::optional<GenerationRequest> request;
    std::optional<SkippedRound> skipped;
    std::optional<SessionError> error;
    bool mode_changed = false;
    bool slots_changed = false;
    /// A RoundCompleted older than the newest request was dropped.
    bool stale_round_discarded = false;
};

struct Transition {
    SessionState state;
    Effects effects;
};

Transition transition(SessionState state, const SessionEvent& event, const SessionSettings& settings);

/// Folds events over the initial state.
SessionState replay(const SessionSettings& settings, const std::vector<SessionEvent>& events);

// Event log: newline-delimited JSON {seq, timestamp, event, payload}; images
// are base64 PNG.
nlohmann::json event_to_json(const SessionEvent& event);
SessionEvent event_from_json(const std::string& name, const nlohmann::json& payload);

class EventLog {
public:
    EventLog() = default;
    explicit EventLog(const std::filesystem::path& path);

    /// Appends and flushes one record; returns its seq.
    std::uint64_t append(const SessionEvent& event);
    /// Appends a record that does not drive the automaton (stroke_begin,
    /// stroke_point); replay skips these.
    std::uint64_t append_record(const std::string& name, const nlohmann::json& payload);
    void flush();
    std::uint64_t size() const { return next_seq_; }

    static std::vector<SessionEvent> read(const std::filesystem::path& path);

private:
    std::ofstream out_;
    std::uint64_t next_seq_ = 0;
};

}  // namespace sketchguide
