// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

#include "sketchguide/service.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <deque>
#include <future>
#include <map>
#include <random>
#include <thread>

#include <spdlog/spdlog.h>

#include "sketchguide/encoding.hpp"
#include "sketchguide/imaging.hpp"
#include "sketchguide/synthetic_backend.hpp"

namespace sketchguide {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using nlohmann::json;

namespace {

json error_message(const std::string& code, const std::string& message) {
    return {{"type", "error"}, {"code", code}, {"message", message}};
}

std::string png_base64(const GrayImage& img) { return base64_encode(encode_png(img)); }

bool valid_session_id(const std::string& id) {
    if (id.empty() || id.size() > 64) return false;
    return std::all_of(id.begin(), id.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_'; });
}

std::string random_session_id() {
    std::random_device rd;
    const std::uint64_t v = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::pair<std::string, std::uint16_t> split_listen(const std::string& listen) {
    const auto colon = listen.rfind(':');
    if (colon == std::string::npos) throw ConfigError("listen must be host:port");
    const int port = std::stoi(listen.substr(colon + 1));
    if (port < 0 || port > 65535) throw ConfigError("listen port out of range");
    return {listen.substr(0, colon), static_cast<std::uint16_t>(port)};
}

}  // namespace

class Connection;

/// One drawing session. Events are serialized by `mutex`; rounds run on the
/// server's worker pool through the session's latest-wins queue.
struct LiveSession {
    std::string id;
    std::filesystem::path dir;
    SessionSettings settings;

    std::mutex mutex;
    SessionState state;
    EventLog log;
    std::weak_ptr<Connection> connection;

    std::atomic<bool> cancel{false};
    std::unique_ptr<InputQueue> queue;
};

struct GuidanceServer::Impl {
    ServiceConfig config;
    SessionSettings settings;
    std::shared_ptr<ModelBackend> backend;
    SchedulerCaches caches;

    asio::io_context io;
    tcp::acceptor acceptor{io};
    std::vector<std::thread> io_threads;
    std::unique_ptr<asio::thread_pool> workers;
    std::uint16_t port = 0;

    std::mutex sessions_mutex;
    std::map<std::string, std::shared_ptr<LiveSession>> sessions;
    std::mutex connections_mutex;
    std::vector<std::weak_ptr<Connection>> connections;
    std::atomic<bool> stopping{false};
    bool started = false;

    Impl(ServiceConfig c, std::shared_ptr<ModelBackend> b)
        : config(std::move(c)),
          settings(config.session_settings()),
          backend(std::move(b)),
          caches(std::make_shared<NoiseSchedule>(config.total_steps, config.beta_start, config.beta_end),
                 config.caches) {}

    void do_accept();
    std::shared_ptr<LiveSession> open_session(const std::string& requested, const std::shared_ptr<Connection>& conn,
                                              bool& restored);
    void apply(const std::shared_ptr<LiveSession>& session, const SessionEvent& event);
    void run_request(const std::shared_ptr<LiveSession>& session, GenerationRequest request, double waited_ms);
    void notify(const std::shared_ptr<LiveSession>& session, const json& message);
    json guidance_message(const SessionState& state) const;
    json state_message(const SessionState& state) const;
};

class Connection : public std::enable_shared_from_this<Connection> {
public:
    Connection(tcp::socket&& socket, GuidanceServer::Impl& server) : ws_(std::move(socket)), server_(server) {}

    void run() {
        asio::dispatch(ws_.get_executor(), [self = shared_from_this()] { self->on_run(); });
    }

    void send(const json& message) {
        asio::post(ws_.get_executor(), [self = shared_from_this(), text = message.dump()]() mutable {
            self->outbox_.push_back(std::move(text));
            if (self->outbox_.size() == 1) self->do_write();
        });
    }

    void close() {
        asio::post(ws_.get_executor(), [self = shared_from_this()] {
            if (!self->ws_.is_open()) return;
            self->ws_.async_close(websocket::close_code::going_away, [self](beast::error_code) {});
        });
    }

private:
    void on_run() {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.read_message_max(64u << 20);
        ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
            if (!ec) self->do_read();
        });
    }

    void do_read() {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) return;
            const std::string text = beast::buffers_to_string(self->buffer_.data());
            self->buffer_.consume(self->buffer_.size());
            self->handle(text);
            self->do_read();
        });
    }

    void do_write() {
        ws_.text(true);
        ws_.async_write(asio::buffer(outbox_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                self->outbox_.clear();
                return;
            }
            self->outbox_.pop_front();
            if (!self->outbox_.empty()) self->do_write();
        });
    }

    void handle(const std::string& text);

    websocket::stream<beast::tcp_stream> ws_;
    beast::flat_buffer buffer_;
    std::deque<std::string> outbox_;
    GuidanceServer::Impl& server_;
    std::shared_ptr<LiveSession> session_;
};

void Connection::handle(const std::string& text) {
    json msg;
    try {
        msg = json::parse(text);
    } catch (const json::exception&) {
        send(error_message("bad_message", "message is not valid JSON"));
        return;
    }
    if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) {
        send(error_message("bad_message", "message needs a string 'type'"));
        return;
    }
    const std::string type = msg["type"];
    try {
        if (type == "open_session") {
            bool restored = false;
            session_ = server_.open_session(msg.value("session_id", std::string()), shared_from_this(), restored);
            send({{"type", "session_opened"},
                  {"session_id", session_->id},
                  {"restored", restored},
                  {"config", config_echo(server_.config)}});
            std::lock_guard lock(session_->mutex);
            send(server_.state_message(session_->state));
            if (!session_->state.slots.empty()) send(server_.guidance_message(session_->state));
            return;
        }
        if (!session_) {
            send(error_message("no_session", "send open_session first"));
            return;
        }
        if (type == "stroke_begin" || type == "stroke_point") {
            json payload = msg;
            payload.erase("type");
            std::lock_guard lock(session_->mutex);
            session_->log.append_record(type, payload);
            return;
        }

        SessionEvent event;
        if (type == "stroke_end") {
            GrayImage canvas = decode_png_gray(base64_decode(msg.at("canvas_png").get<std::string>()));
            const std::size_t res = server_.settings.resolution;
            if (canvas.width() != res || canvas.height() != res) canvas = resize_bilinear(canvas, res, res);
            event = StrokeEnd{std::move(canvas)};
        } else if (type == "set_prompt") {
            event = SetPrompt{msg.at("text").get<std::string>()};
        } else if (type == "set_style") {
            event = SetStyle{msg.at("id").get<std::string>()};
        } else if (type == "select_guidance") {
            event = SelectGuidance{msg.at("index").get<std::size_t>()};
        } else if (type == "clear_background") {
            event = ClearBackground{};
        } else if (type == "continue_drawing") {
            event = ContinueDrawing{};
        } else {
            send(error_message("unknown_type", "unknown message type '" + type + "'"));
            return;
        }
        server_.apply(session_, event);
    } catch (const json::exception& e) {
        send(error_message("bad_message", e.what()));
    } catch (const ImageIoError& e) {
        send(error_message("bad_image", e.what()));
    } catch (const ContractViolation& e) {
        send(error_message("bad_message", e.what()));
    }
}

void GuidanceServer::Impl::do_accept() {
    acceptor.async_accept(asio::make_strand(io), [this](beast::error_code ec, tcp::socket socket) {
        if (ec || stopping) return;
        auto conn = std::make_shared<Connection>(std::move(socket), *this);
        {
            std::lock_guard lock(connections_mutex);
            std::erase_if(connections, [](const auto& w) { return w.expired(); });
            connections.push_back(conn);
        }
        conn->run();
        do_accept();
    });
}

std::shared_ptr<LiveSession> GuidanceServer::Impl::open_session(const std::string& requested,
                                                                const std::shared_ptr<Connection>& conn,
                                                                bool& restored) {
    if (!requested.empty() && !valid_session_id(requested)) throw ContractViolation("invalid session_id");
    std::lock_guard lock(sessions_mutex);
    const std::string id = requested.empty() ? random_session_id() : requested;
    if (auto it = sessions.find(id); it != sessions.end()) {
        std::lock_guard session_lock(it->second->mutex);
        it->second->connection = conn;
        restored = true;
        return it->second;
    }

    auto session = std::make_shared<LiveSession>();
    session->id = id;
    session->dir = config.data_dir / id;
    session->settings = settings;
    std::filesystem::create_directories(session->dir);
    const auto log_path = session->dir / "events.ndjson";
    restored = std::filesystem::exists(log_path);
    session->state = restored ? replay(settings, EventLog::read(log_path)) : SessionState::initial(settings);
    session->log = EventLog(log_path);
    session->connection = conn;

    std::weak_ptr<LiveSession> weak = session;
    session->queue = std::make_unique<InputQueue>(
        [this](std::function<void()> job) { asio::post(*workers, std::move(job)); },
        [this, weak](GenerationRequest request, double waited) {
            if (auto s = weak.lock()) run_request(s, std::move(request), waited);
        });
    sessions.emplace(id, session);
    return session;
}

json GuidanceServer::Impl::guidance_message(const SessionState& state) const {
    json images = json::array();
    std::uint64_t round_id = 0;
    for (const auto& slot : state.slots) {
        images.push_back(png_base64(slot.sketch));
        round_id = slot.round_id;
    }
    return {{"type", "guidance_set"}, {"round_id", round_id}, {"images", images}};
}

json GuidanceServer::Impl::state_message(const SessionState& state) const {
    json msg{{"type", "state_changed"}, {"mode", to_string(state.mode)}};
    if (state.background) msg["background"] = png_base64(*state.background);
    return msg;
}

void GuidanceServer::Impl::notify(const std::shared_ptr<LiveSession>& session, const json& message) {
    if (auto conn = session->connection.lock()) conn->send(message);
}

void GuidanceServer::Impl::apply(const std::shared_ptr<LiveSession>& session, const SessionEvent& event) {
    std::lock_guard lock(session->mutex);
    session->log.append(event);
    auto [next, fx] = transition(std::move(session->state), event, session->settings);
    session->state = std::move(next);

    if (fx.error) notify(session, error_message(fx.error->code, fx.error->message));
    if (fx.mode_changed) notify(session, state_message(session->state));
    if (fx.slots_changed) notify(session, guidance_message(session->state));
    if (fx.skipped) {
        notify(session, {{"type", "round_skipped"},
                         {"round_id", fx.skipped->round_id},
                         {"similarity", fx.skipped->decision.similarity},
                         {"probability", fx.skipped->decision.probability}});
    }
    if (fx.request && !stopping) session->queue->enqueue(std::move(*fx.request));
}

void GuidanceServer::Impl::run_request(const std::shared_ptr<LiveSession>& session, GenerationRequest request,
                                       double waited_ms) {
    if (stopping || session->cancel) return;
    try {
        GenerationRound round = run_round(request, *backend, caches, &session->cancel);
        round.timings.queue_wait_ms = waited_ms;
        const auto dir = session->dir / std::to_string(request.round_id);
        std::filesystem::create_directories(dir);
        for (std::size_t i = 0; i < round.rgb_candidates.size(); ++i) {
            write_png(dir / ("candidate_" + std::to_string(i) + ".png"), round.rgb_candidates[i]);
            write_png(dir / ("guidance_" + std::to_string(i) + ".png"), round.guidance_sketches[i]);
        }
        spdlog::info("{}", metrics_line(round, "session=" + session->id));
        apply(session, RoundCompleted{request.round_id, std::move(round.guidance_sketches)});
    } catch (const RoundCancelled&) {
        spdlog::info("session={} round_id={} status=cancelled", session->id, request.round_id);
    } catch (const std::exception& e) {
        spdlog::error("session={} round_id={} status=failed error={}", session->id, request.round_id, e.what());
        notify(session, error_message("round_failed", e.what()));
    }
}

GuidanceServer::GuidanceServer(ServiceConfig config, std::shared_ptr<ModelBackend> backend) {
    config.finalize();
    require(backend != nullptr, "GuidanceServer: backend is required");
    require(backend->descriptor().working_resolution == config.backend.working_resolution,
            "GuidanceServer: backend resolution differs from config");
    impl_ = std::make_unique<Impl>(std::move(config), std::move(backend));
}

GuidanceServer::~GuidanceServer() { shutdown(); }

void GuidanceServer::start() {
    auto& s = *impl_;
    const auto [host, port] = split_listen(s.config.listen);
    const tcp::endpoint endpoint(asio::ip::make_address(host), port);
    s.acceptor.open(endpoint.protocol());
    s.acceptor.set_option(asio::socket_base::reuse_address(true));
    s.acceptor.bind(endpoint);
    s.acceptor.listen();
    s.port = s.acceptor.local_endpoint().port();

    std::size_t threads = s.config.workers;
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    s.workers = std::make_unique<asio::thread_pool>(threads);
    s.do_accept();
    for (int i = 0; i < 2; ++i) s.io_threads.emplace_back([&s] { s.io.run(); });
    s.started = true;
    spdlog::info("guidance service listening on {}:{} ({} workers)", host, s.port, threads);
}

std::uint16_t GuidanceServer::port() const { return impl_->port; }

void GuidanceServer::shutdown() {
    if (!impl_ || !impl_->started || impl_->stopping.exchange(true)) return;
    auto& s = *impl_;
    asio::post(s.io, [&s] {
        beast::error_code ec;
        s.acceptor.close(ec);
    });

    std::vector<std::shared_ptr<LiveSession>> sessions;
    {
        std::lock_guard lock(s.sessions_mutex);
        for (auto& [id, session] : s.sessions) sessions.push_back(session);
    }
    for (auto& session : sessions) {
        session->cancel = true;
        session->queue->discard_pending();
    }
    for (auto& session : sessions) {
        session->queue->wait_idle();
        std::lock_guard lock(session->mutex);
        session->log.flush();
    }
    s.workers->join();
    {
        std::lock_guard lock(s.connections_mutex);
        for (auto& w : s.connections) {
            if (auto c = w.lock()) c->close();
        }
    }
    // Let close frames go out before stopping the loop.
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    s.io.stop();
    for (auto& t : s.io_threads) {
        if (t.joinable()) t.join();
    }
    spdlog::info("guidance service stopped");
}

void GuidanceServer::run_until_signal() {
    asio::io_context signals_io;
    asio::signal_set signals(signals_io, SIGINT, SIGTERM);
    signals.async_wait([](beast::error_code, int) {});
    signals_io.run();
    shutdown();
}

}  // namespace sketchguide
