// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

#include "sketchguide/remote_backend.hpp"

#include <sys/socket.h>
#include <sys/time.h>

#include <array>
#include <boost/asio.hpp>
#include <list>

#include <spdlog/spdlog.h>

#include "sketchguide/imaging.hpp"

namespace sketchguide {

namespace asio = boost::asio;
using asio::ip::tcp;

RemoteEndpoint RemoteEndpoint::parse(const std::string& address) {
    RemoteEndpoint e;
    const auto colon = address.rfind(':');
    require(colon != std::string::npos && colon + 1 < address.size(), "remote address must be host:port");
    e.host = address.substr(0, colon);
    const int port = std::stoi(address.substr(colon + 1));
    require(port > 0 && port < 65536, "remote port out of range");
    e.port = static_cast<std::uint16_t>(port);
    return e;
}

namespace {

void set_timeouts(tcp::socket& socket, int timeout_ms) {
    timeval tv{};
    tv.tv_sec = timeout_ms / 1000;
    tv.tv_usec = (timeout_ms % 1000) * 1000;
    ::setsockopt(socket.native_handle(), SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    ::setsockopt(socket.native_handle(), SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
}

void write_message(tcp::socket& socket, const protocol::Message& message) {
    const auto frame = protocol::encode_frame(message);
    asio::write(socket, asio::buffer(frame));
}

/// Reads one frame's payload; returns nothing on a clean end of stream.
std::optional<std::vector<std::uint8_t>> read_payload(tcp::socket& socket) {
    std::array<std::uint8_t, 4> prefix{};
    boost::system::error_code ec;
    asio::read(socket, asio::buffer(prefix), ec);
    if (ec == asio::error::eof) return std::nullopt;
    if (ec) throw boost::system::system_error(ec);
    const std::uint32_t length = protocol::read_u32_le(prefix.data());
    if (length > protocol::kMaxPayload) throw protocol::ProtocolError("payload exceeds frame limit");
    std::vector<std::uint8_t> payload(length);
    asio::read(socket, asio::buffer(payload));
    return payload;
}

std::optional<protocol::Message> read_message(tcp::socket& socket) {
    auto payload = read_payload(socket);
    if (!payload) return std::nullopt;
    return protocol::decode_payload(*payload);
}

}  // namespace

struct RemoteBackend::Connection {
    asio::io_context io;
    tcp::socket socket{io};
};

RemoteBackend::RemoteBackend(RemoteEndpoint endpoint, BackendDescriptor descriptor, XdogParams fallback)
    : endpoint_(std::move(endpoint)), descriptor_(std::move(descriptor)), fallback_(fallback) {
    descriptor_.kind = BackendKind::Remote;
    descriptor_.validate();
    require(endpoint_.max_in_flight >= 1, "RemoteBackend: max_in_flight must be at least 1");
}

RemoteBackend::~RemoteBackend() = default;

std::unique_ptr<RemoteBackend::Connection> RemoteBackend::acquire() {
    std::unique_lock lock(mutex_);
    available_.wait(lock, [&] { return in_flight_ < endpoint_.max_in_flight; });
    ++in_flight_;
    if (!idle_.empty()) {
        auto conn = std::move(idle_.back());
        idle_.pop_back();
        return conn;
    }
    return nullptr;
}

void RemoteBackend::release(std::unique_ptr<Connection> conn) {
    {
        std::lock_guard lock(mutex_);
        --in_flight_;
        if (conn) idle_.push_back(std::move(conn));
    }
    available_.notify_one();
}

protocol::Message RemoteBackend::exchange(const protocol::Message& request) {
    auto conn = acquire();
    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt <= endpoint_.reconnect_attempts; ++attempt) {
        try {
            if (!conn) {
                conn = std::make_unique<Connection>();
                tcp::resolver resolver(conn->io);
                asio::connect(conn->socket, resolver.resolve(endpoint_.host, std::to_string(endpoint_.port)));
                set_timeouts(conn->socket, endpoint_.timeout_ms);
            }
            write_message(conn->socket, request);
            auto response = read_message(conn->socket);
            if (!response) throw protocol::ProtocolError("connection closed before response");
            if (response->request_id() != request.request_id()) {
                throw protocol::ProtocolError("response request_id does not match");
            }
            release(std::move(conn));
            if (response->is_error()) {
                throw BackendError("remote " + request.op() + " failed: " + response->header["error"].get<std::string>());
            }
            return std::move(*response);
        } catch (const BackendError&) {
            throw;
        } catch (const std::exception& e) {
            last_error = e.what();
            conn.reset();
        }
    }
    release(nullptr);
    throw BackendError("remote " + request.op() + " unreachable: " + last_error);
}

void RemoteBackend::handshake() {
    (void)encode_prompt("", descriptor_.styles.front());
}

namespace {

const protocol::Tensor& single(const protocol::Message& m) {
    if (m.tensors.size() != 1) throw BackendError("remote " + m.op() + " returned wrong tensor count");
    return m.tensors.front();
}

template <class F>
auto checked(const std::string& op, F&& f) {
    try {
        return f();
    } catch (const protocol::ProtocolError& e) {
        throw BackendError("remote " + op + " returned a malformed tensor: " + e.what());
    } catch (const ContractViolation& e) {
        throw BackendError("remote " + op + " returned a malformed tensor: " + e.what());
    }
}

}  // namespace

PromptEmbedding RemoteBackend::encode_prompt(const std::string& text, const std::string& style) {
    require(descriptor_.has_style(style), "encode_prompt: unknown style");
    const auto response = exchange(protocol::make_encode_prompt(next_id_++, text, style));
    return checked("encode_prompt", [&] { return protocol::to_embedding(single(response)); });
}

Latent RemoteBackend::vae_encode(const RgbImage& image) {
    const Latent expected = Latent::for_source(image.width(), image.height());
    const auto response = exchange(protocol::make_vae_encode(next_id_++, image));
    Latent out = checked("vae_encode", [&] { return protocol::to_latent(single(response)); });
    if (!out.same_shape(expected)) throw BackendError("remote vae_encode returned " + shape_string(out));
    return out;
}

RgbImage RemoteBackend::vae_decode(const Latent& latent) {
    const auto response = exchange(protocol::make_vae_decode(next_id_++, latent));
    RgbImage out = checked("vae_decode", [&] { return protocol::to_rgb(single(response)); });
    if (out.width() != latent.width() * Latent::kDownscale || out.height() != latent.height() * Latent::kDownscale) {
        throw BackendError("remote vae_decode returned wrong image size");
    }
    return out;
}

std::vector<Latent> RemoteBackend::predict_noise(std::span<const NoiseQuery> batch) {
    const auto response = exchange(protocol::make_predict_noise(next_id_++, batch));
    if (response.tensors.size() != batch.size()) throw BackendError("remote predict_noise returned wrong batch size");
    std::vector<Latent> out;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        Latent l = checked("predict_noise", [&] { return protocol::to_latent(response.tensors[i]); });
        if (!l.same_shape(*batch[i].latent)) throw BackendError("remote predict_noise returned " + shape_string(l));
        out.push_back(std::move(l));
    }
    return out;
}

GrayImage RemoteBackend::extract_lines(const RgbImage& image) {
    try {
        const auto response = exchange(protocol::make_extract_lines(next_id_++, image));
        GrayImage out = checked("extract_lines", [&] { return protocol::to_gray(single(response)); });
        if (out.width() != image.width() || out.height() != image.height()) {
            throw BackendError("remote extract_lines returned wrong image size");
        }
        return out;
    } catch (const BackendError& e) {
        ++fallbacks_;
        spdlog::warn("extract_lines downgraded to classical extractor: {}", e.what());
        return xdog_extract(rgb_to_gray(image), fallback_);
    }
}

struct BackendServer::Impl {
    ModelBackend& backend;
    asio::io_context io;
    tcp::acceptor acceptor{io};
    std::thread accept_thread;
    std::mutex mutex;
    std::list<std::shared_ptr<tcp::socket>> sockets;
    std::list<std::thread> workers;
    std::atomic<bool> stopping{false};

    explicit Impl(ModelBackend& b) : backend(b) {}

    void serve(std::shared_ptr<tcp::socket> socket) {
        try {
            while (!stopping) {
                const auto payload = read_payload(*socket);
                if (!payload) break;
                // A well-framed but unreadable payload gets an error reply;
                // the frame boundary is intact, so the stream stays usable.
                protocol::Message request;
                try {
                    request = protocol::decode_payload(*payload);
                } catch (const protocol::ProtocolError& e) {
                    write_message(*socket, protocol::make_error(request, e.what()));
                    continue;
                }
                write_message(*socket, protocol::handle_request(backend, request));
            }
        } catch (const protocol::ProtocolError& e) {
            spdlog::debug("backend server closing connection: {}", e.what());
        } catch (const std::exception& e) {
            spdlog::debug("backend server connection ended: {}", e.what());
        }
    }

    void accept_loop() {
        while (!stopping) {
            auto socket = std::make_shared<tcp::socket>(io);
            boost::system::error_code ec;
            acceptor.accept(*socket, ec);
            if (ec || stopping) break;
            std::lock_guard lock(mutex);
            sockets.push_back(socket);
            workers.emplace_back([this, socket] { serve(socket); });
        }
    }
};

BackendServer::BackendServer(ModelBackend& backend, std::uint16_t port, const std::string& address)
    : impl_(std::make_unique<Impl>(backend)) {
    tcp::endpoint endpoint(asio::ip::make_address(address), port);
    impl_->acceptor.open(endpoint.protocol());
    impl_->acceptor.set_option(tcp::acceptor::reuse_address(true));
    impl_->acceptor.bind(endpoint);
    impl_->acceptor.listen();
    port_ = impl_->acceptor.local_endpoint().port();
    impl_->accept_thread = std::thread([this] { impl_->accept_loop(); });
}

BackendServer::~BackendServer() { stop(); }

void BackendServer::stop() {
    if (!impl_ || impl_->stopping.exchange(true)) return;
    boost::system::error_code ec;
    impl_->acceptor.cancel(ec);
    // Unblock accept() with a throwaway connection; cancel() does not wake a
    // synchronous accept.
    {
        asio::io_context io;
        tcp::socket poke(io);
        poke.connect(tcp::endpoint(asio::ip::make_address("127.0.0.1"), port_), ec);
    }
    if (impl_->accept_thread.joinable()) impl_->accept_thread.join();
    impl_->acceptor.close(ec);
    {
        std::lock_guard lock(impl_->mutex);
        for (auto& s : impl_->sockets) s->shutdown(tcp::socket::shutdown_both, ec);
    }
    for (auto& w : impl_->workers) {
        if (w.joinable()) w.join();
    }
}

}  // namespace sketchguide
