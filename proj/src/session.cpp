// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

#include "sketchguide/session.hpp"

#include <chrono>

#include "sketchguide/encoding.hpp"
#include "sketchguide/imaging.hpp"
#include "sketchguide/random.hpp"

namespace sketchguide {

using nlohmann::json;

const char* to_string(SessionMode mode) {
    switch (mode) {
        case SessionMode::Active: return "ACTIVE";
        case SessionMode::PausedBackground: return "PAUSED_BG";
        case SessionMode::PausedCleared: return "PAUSED_CLEARED";
    }
    return "UNKNOWN";
}

SessionState SessionState::initial(const SessionSettings& settings) {
    require(!settings.styles.empty(), "SessionSettings: at least one style is required");
    SessionState s;
    s.canvas = GrayImage(settings.resolution, settings.resolution, 1.0f);
    s.style = settings.styles.front();
    s.gate = GateState::create(settings.tau, settings.seed);
    return s;
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

/// What the gate compares as "prompt": text and style together.
std::string conditioning_key(const SessionState& s) { return s.prompt + '\x1f' + s.style; }

bool has_style(const SessionSettings& settings, const std::string& id) {
    return std::find(settings.styles.begin(), settings.styles.end(), id) != settings.styles.end();
}

/// Runs the gate on the current canvas and emits a request or a skip.
void gate_and_emit(SessionState& s, Effects& fx, const SessionSettings& settings) {
    auto outcome = evaluate(std::move(s.gate), s.canvas, conditioning_key(s));
    s.gate = std::move(outcome.state);
    const std::uint64_t round_id = ++s.issued_round_ids;
    if (outcome.decision.action == GateAction::Skip) {
        fx.skipped = SkippedRound{round_id, outcome.decision};
        return;
    }
    s.latest_round_id = round_id;
    GenerationRequest req;
    req.round_id = round_id;
    req.sketch = s.canvas;
    req.prompt = s.prompt;
    req.style = s.style;
    req.seed = hash_combine(settings.seed, round_id);
    req.config = settings.pipeline;
    fx.request = std::move(req);
}

void set_mode(SessionState& s, Effects& fx, SessionMode mode) {
    if (s.mode != mode) fx.mode_changed = true;
    s.mode = mode;
}

void change_conditioning(SessionState& s, Effects& fx, const SessionSettings& settings) {
    if (s.mode == SessionMode::Active) {
        gate_and_emit(s, fx, settings);
    } else {
        s.conditioning_dirty = true;
    }
}

}  // namespace

Transition transition(SessionState s, const SessionEvent& event, const SessionSettings& settings) {
    Effects fx;
    std::visit(
        overloaded{
            [&](const StrokeEnd& e) {
                if (e.canvas.width() != settings.resolution || e.canvas.height() != settings.resolution) {
                    fx.error = SessionError{"bad_canvas", "canvas must match the working resolution"};
                    return;
                }
                s.canvas = quantize8(e.canvas);
                if (s.mode == SessionMode::Active) {
                    gate_and_emit(s, fx, settings);
                } else {
                    s.gate = observe(std::move(s.gate), s.canvas);
                }
            },
            [&](const SelectGuidance& e) {
                const auto it = std::find_if(s.slots.begin(), s.slots.end(),
                                             [&](const GuidanceSlot& g) { return g.index == e.index; });
                if (it == s.slots.end()) {
                    fx.error = SessionError{"empty_slot", "no guidance sketch in slot " + std::to_string(e.index)};
                    return;
                }
                s.background = it->sketch;
                set_mode(s, fx, SessionMode::PausedBackground);
                fx.mode_changed = true;
            },
            [&](const ClearBackground&) {
                if (s.background) fx.mode_changed = true;
                s.background.reset();
                if (s.mode == SessionMode::PausedBackground) set_mode(s, fx, SessionMode::PausedCleared);
            },
            [&](const ContinueDrawing&) {
                if (s.background) fx.mode_changed = true;
                s.background.reset();
                set_mode(s, fx, SessionMode::Active);
                if (s.conditioning_dirty) {
                    s.conditioning_dirty = false;
                    gate_and_emit(s, fx, settings);
                }
            },
            [&](const SetPrompt& e) {
                if (e.text == s.prompt) return;
                s.prompt = e.text;
                change_conditioning(s, fx, settings);
            },
            [&](const SetStyle& e) {
                if (!has_style(settings, e.id)) {
                    fx.error = SessionError{"unknown_style", "unknown style '" + e.id + "'"};
                    return;
                }
                if (e.id == s.style) return;
                s.style = e.id;
                change_conditioning(s, fx, settings);
            },
            [&](const RoundCompleted& e) {
                if (e.round_id != s.latest_round_id) {
                    fx.stale_round_discarded = true;
                    return;
                }
                s.slots.clear();
                for (std::size_t i = 0; i < e.sketches.size() && i < kGuidanceSlots; ++i) {
                    s.slots.push_back({i, quantize8(e.sketches[i]), e.round_id});
                }
                fx.slots_changed = true;
            },
        },
        event);
    return {std::move(s), std::move(fx)};
}

SessionState replay(const SessionSettings& settings, const std::vector<SessionEvent>& events) {
    SessionState s = SessionState::initial(settings);
    for (const auto& e : events) s = transition(std::move(s), e, settings).state;
    return s;
}

const char* event_name(const SessionEvent& event) {
    return std::visit(overloaded{
                          [](const StrokeEnd&) { return "stroke_end"; },
                          [](const SelectGuidance&) { return "select_guidance"; },
                          [](const ClearBackground&) { return "clear_background"; },
                          [](const ContinueDrawing&) { return "continue_drawing"; },
                          [](const SetPrompt&) { return "set_prompt"; },
                          [](const SetStyle&) { return "set_style"; },
                          [](const RoundCompleted&) { return "round_completed"; },
                      },
                      event);
}

namespace {

std::string image_to_base64(const GrayImage& img) { return base64_encode(encode_png(img)); }

GrayImage image_from_base64(const json& value) {
    return decode_png_gray(base64_decode(value.get<std::string>()));
}

}  // namespace

json event_to_json(const SessionEvent& event) {
    return std::visit(overloaded{
                          [](const StrokeEnd& e) { return json{{"canvas_png", image_to_base64(e.canvas)}}; },
                          [](const SelectGuidance& e) { return json{{"index", e.index}}; },
                          [](const ClearBackground&) { return json::object(); },
                          [](const ContinueDrawing&) { return json::object(); },
                          [](const SetPrompt& e) { return json{{"text", e.text}}; },
                          [](const SetStyle& e) { return json{{"id", e.id}}; },
                          [](const RoundCompleted& e) {
                              json images = json::array();
                              for (const auto& s : e.sketches) images.push_back(image_to_base64(s));
                              return json{{"round_id", e.round_id}, {"images", images}};
                          },
                      },
                      event);
}

SessionEvent event_from_json(const std::string& name, const json& payload) {
    if (name == "stroke_end") return StrokeEnd{image_from_base64(payload.at("canvas_png"))};
    if (name == "select_guidance") return SelectGuidance{payload.at("index").get<std::size_t>()};
    if (name == "clear_background") return ClearBackground{};
    if (name == "continue_drawing") return ContinueDrawing{};
    if (name == "set_prompt") return SetPrompt{payload.at("text").get<std::string>()};
    if (name == "set_style") return SetStyle{payload.at("id").get<std::string>()};
    if (name == "round_completed") {
        RoundCompleted e{payload.at("round_id").get<std::uint64_t>(), {}};
        for (const auto& img : payload.at("images")) e.sketches.push_back(image_from_base64(img));
        return e;
    }
    throw ContractViolation("unknown session event '" + name + "'");
}

EventLog::EventLog(const std::filesystem::path& path) {
    if (std::filesystem::exists(path)) {
        std::ifstream in(path);
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty()) ++next_seq_;
        }
    }
    out_.open(path, std::ios::app);
    if (!out_) throw std::runtime_error("cannot open event log " + path.string());
}

std::uint64_t EventLog::append(const SessionEvent& event) {
    return append_record(event_name(event), event_to_json(event));
}

std::uint64_t EventLog::append_record(const std::string& name, const json& payload) {
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    const json record{{"seq", next_seq_},
                      {"timestamp", std::chrono::duration_cast<std::chrono::milliseconds>(now).count()},
                      {"event", name},
                      {"payload", payload}};
    if (out_.is_open()) {
        out_ << record.dump() << '\n';
        out_.flush();
    }
    return next_seq_++;
}

void EventLog::flush() {
    if (out_.is_open()) out_.flush();
}

std::vector<SessionEvent> EventLog::read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read event log " + path.string());
    std::vector<SessionEvent> events;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json record;
        try {
            record = json::parse(line);
        } catch (const json::exception&) {
            // A torn final line from an interrupted write ends the log.
            break;
        }
        const auto name = record.at("event").get<std::string>();
        if (name == "stroke_begin" || name == "stroke_point") continue;
        events.push_back(event_from_json(name, record.at("payload")));
    }
    return events;
}

}  // namespace sketchguide
