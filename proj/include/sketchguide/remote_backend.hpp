// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "sketchguide/backend.hpp"
#include "sketchguide/protocol.hpp"
#include "sketchguide/sketch_optimizer.hpp"

namespace sketchguide {

struct RemoteEndpoint {
    std::string host = "127.0.0.1";
    std::uint16_t port = 7860;
    int timeout_ms = 30000;
    std::size_t max_in_flight = 4;
    int reconnect_attempts = 2;

    /// "host:port"
    static RemoteEndpoint parse(const std::string& address);
};

/// Client for a backend reachable over the wire protocol. Holds up to
/// max_in_flight connections; each request borrows one for a full exchange.
/// A failed exchange drops its connection and retries on a fresh one.
class RemoteBackend final : public ModelBackend {
public:
    RemoteBackend(RemoteEndpoint endpoint, BackendDescriptor descriptor, XdogParams fallback = {});
    ~RemoteBackend() override;

    const BackendDescriptor& descriptor() const override { return descriptor_; }

    /// Round-trips an empty-prompt encode to prove the bridge is answering.
    void handshake();

    PromptEmbedding encode_prompt(const std::string& text, const std::string& style) override;
    Latent vae_encode(const RgbImage& image) override;
    RgbImage vae_decode(const Latent& latent) override;
    std::vector<Latent> predict_noise(std::span<const NoiseQuery> batch) override;
    /// Falls back to the classical extractor when the remote call fails.
    GrayImage extract_lines(const RgbImage& image) override;

    std::size_t fallback_count() const { return fallbacks_.load(); }

private:
    struct Connection;

    protocol::Message exchange(const protocol::Message& request);
    std::unique_ptr<Connection> acquire();
    void release(std::unique_ptr<Connection> conn);

    RemoteEndpoint endpoint_;
    BackendDescriptor descriptor_;
    XdogParams fallback_;

    std::mutex mutex_;
    std::condition_variable available_;
    std::vector<std::unique_ptr<Connection>> idle_;
    std::size_t in_flight_ = 0;
    std::atomic<std::uint64_t> next_id_{1};
    std::atomic<std::size_t> fallbacks_{0};
};

/// Serves a ModelBackend over the wire protocol on a TCP port, one thread per
/// connection. Malformed requests get an error frame and the connection stays
/// open; a broken frame stream closes it.
class BackendServer {
public:
    BackendServer(ModelBackend& backend, std::uint16_t port = 0, const std::string& address = "127.0.0.1");
    ~BackendServer();

    BackendServer(const BackendServer&) = delete;
    BackendServer& operator=(const BackendServer&) = delete;

    std::uint16_t port() const { return port_; }
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::uint16_t port_ = 0;
};

}  // namespace sketchguide
