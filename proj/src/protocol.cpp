// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

#include "sketchguide/protocol.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <functional>
#include <numeric>

namespace sketchguide::protocol {

using nlohmann::json;

std::uint32_t read_u32_le(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void write_u32_le(std::uint8_t* p, std::uint32_t v) {
    p[0] = static_cast<std::uint8_t>(v);
    p[1] = static_cast<std::uint8_t>(v >> 8);
    p[2] = static_cast<std::uint8_t>(v >> 16);
    p[3] = static_cast<std::uint8_t>(v >> 24);
}

std::size_t Tensor::element_count() const {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string Message::op() const { return header.value("op", std::string()); }

std::uint64_t Message::request_id() const { return header.value("request_id", std::uint64_t{0}); }

std::vector<std::uint8_t> encode_payload(const Message& message) {
    json header = message.header;
    json shapes = json::array();
    std::size_t floats = 0;
    for (const auto& t : message.tensors) {
        if (t.data.size() != t.element_count()) throw ProtocolError("tensor data does not match its shape");
        shapes.push_back(t.shape);
        floats += t.data.size();
    }
    header["shapes"] = std::move(shapes);
    header["dtype"] = "f32";
    const std::string text = header.dump();

    std::vector<std::uint8_t> out(text.size() + 1 + floats * 4);
    std::memcpy(out.data(), text.data(), text.size());
    out[text.size()] = '\n';
    std::uint8_t* p = out.data() + text.size() + 1;
    for (const auto& t : message.tensors) {
        for (float v : t.data) {
            write_u32_le(p, std::bit_cast<std::uint32_t>(v));
            p += 4;
        }
    }
    return out;
}

Message decode_payload(std::span<const std::uint8_t> payload) {
    const auto newline = std::find(payload.begin(), payload.end(), std::uint8_t{'\n'});
    if (newline == payload.end()) throw ProtocolError("payload has no header terminator");
    Message m;
    try {
        m.header = json::parse(payload.begin(), newline);
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("malformed header: ") + e.what());
    }
    if (!m.header.is_object()) throw ProtocolError("header must be a JSON object");

    const auto* body = &*newline + 1;
    const std::size_t body_size = static_cast<std::size_t>(payload.data() + payload.size() - body);
    const json shapes = m.header.value("shapes", json::array());
    if (!shapes.is_array()) throw ProtocolError("shapes must be an array");
    if (m.header.value("dtype", std::string()) != "f32") {
        throw ProtocolError("unsupported dtype");
    }

    std::size_t offset = 0;
    for (const auto& s : shapes) {
        Tensor t;
        try {
            t.shape = s.get<std::vector<std::size_t>>();
        } catch (const json::exception&) {
            throw ProtocolError("shape entries must be arrays of non-negative integers");
        }
        const std::size_t count = t.element_count();
        if (count > (body_size - offset) / 4) throw ProtocolError("tensor bytes shorter than declared shapes");
        t.data.resize(count);
        for (std::size_t i = 0; i < count; ++i) {
            t.data[i] = std::bit_cast<float>(read_u32_le(body + offset + 4 * i));
        }
        offset += 4 * count;
        m.tensors.push_back(std::move(t));
    }
    if (offset != body_size) throw ProtocolError("trailing tensor bytes beyond declared shapes");
    return m;
}

std::vector<std::uint8_t> encode_frame(const Message& message) {
    const auto payload = encode_payload(message);
    if (payload.size() > kMaxPayload) throw ProtocolError("payload exceeds frame limit");
    std::vector<std::uint8_t> out(4 + payload.size());
    write_u32_le(out.data(), static_cast<std::uint32_t>(payload.size()));
    std::copy(payload.begin(), payload.end(), out.begin() + 4);
    return out;
}

Message decode_frame(std::span<const std::uint8_t> frame) {
    if (frame.size() < 4) throw ProtocolError("frame shorter than its length prefix");
    const std::uint32_t length = read_u32_le(frame.data());
    if (length > kMaxPayload) throw ProtocolError("payload exceeds frame limit");
    if (frame.size() - 4 != length) throw ProtocolError("frame length does not match prefix");
    return decode_payload(frame.subspan(4));
}

Tensor to_tensor(const Latent& latent) {
    Tensor t{{latent.channels(), latent.height(), latent.width()}, {}};
    t.data.reserve(latent.size());
    for (double v : latent.values()) t.data.push_back(static_cast<float>(v));
    return t;
}

Tensor to_tensor(const RgbImage& image) {
    return {{image.height(), image.width(), 3}, {image.values().begin(), image.values().end()}};
}

Tensor to_tensor(const GrayImage& image) {
    return {{image.height(), image.width()}, {image.pixels().begin(), image.pixels().end()}};
}

Tensor to_tensor(const PromptEmbedding& embedding) {
    return {{embedding.tokens, embedding.dim}, embedding.data};
}

namespace {

void expect_shape(const Tensor& t, std::size_t rank, const char* what) {
    if (t.shape.size() != rank) throw ProtocolError(std::string("unexpected tensor rank for ") + what);
    for (float v : t.data) {
        if (!std::isfinite(v)) throw ProtocolError(std::string("non-finite value in ") + what);
    }
}

std::vector<float> clamped(const std::vector<float>& data) {
    std::vector<float> out(data.size());
    std::transform(data.begin(), data.end(), out.begin(), [](float v) { return std::clamp(v, 0.0f, 1.0f); });
    return out;
}

}  // namespace

Latent to_latent(const Tensor& t) {
    expect_shape(t, 3, "latent");
    if (t.shape[0] != Latent::kChannels || t.shape[1] == 0 || t.shape[2] == 0) {
        throw ProtocolError("latent must have shape [4,h,w]");
    }
    return Latent(t.shape[1], t.shape[2], std::vector<double>(t.data.begin(), t.data.end()));
}

RgbImage to_rgb(const Tensor& t) {
    expect_shape(t, 3, "rgb image");
    if (t.shape[2] != 3 || t.shape[0] == 0 || t.shape[1] == 0) throw ProtocolError("rgb image must have shape [H,W,3]");
    return RgbImage(t.shape[1], t.shape[0], clamped(t.data));
}

GrayImage to_gray(const Tensor& t) {
    expect_shape(t, 2, "gray image");
    if (t.shape[0] == 0 || t.shape[1] == 0) throw ProtocolError("gray image must have shape [H,W]");
    return GrayImage(t.shape[1], t.shape[0], clamped(t.data));
}

PromptEmbedding to_embedding(const Tensor& t) {
    expect_shape(t, 2, "embedding");
    return {t.shape[0], t.shape[1], t.data};
}

Message make_encode_prompt(std::uint64_t id, const std::string& text, const std::string& style) {
    Message m;
    m.header = {{"op", "encode_prompt"}, {"request_id", id}, {"text", text}, {"style", style}};
    return m;
}

Message make_vae_encode(std::uint64_t id, const RgbImage& image) {
    Message m;
    m.header = {{"op", "vae_encode"}, {"request_id", id}};
    m.tensors.push_back(to_tensor(image));
    return m;
}

Message make_vae_decode(std::uint64_t id, const Latent& latent) {
    Message m;
    m.header = {{"op", "vae_decode"}, {"request_id", id}};
    m.tensors.push_back(to_tensor(latent));
    return m;
}

Message make_predict_noise(std::uint64_t id, std::span<const NoiseQuery> batch) {
    Message m;
    std::vector<int> timesteps;
    std::vector<std::size_t> embed_index;
    std::vector<const PromptEmbedding*> unique;
    for (const auto& q : batch) {
        m.tensors.push_back(to_tensor(*q.latent));
        timesteps.push_back(q.timestep);
        auto it = std::find(unique.begin(), unique.end(), q.embedding);
        if (it == unique.end()) {
            unique.push_back(q.embedding);
            it = unique.end() - 1;
        }
        embed_index.push_back(static_cast<std::size_t>(it - unique.begin()));
    }
    for (const auto* e : unique) m.tensors.push_back(to_tensor(*e));
    m.header = {{"op", "predict_noise"}, {"request_id", id}, {"timesteps", timesteps}, {"embed_index", embed_index}};
    return m;
}

Message make_extract_lines(std::uint64_t id, const RgbImage& image) {
    Message m;
    m.header = {{"op", "extract_lines"}, {"request_id", id}};
    m.tensors.push_back(to_tensor(image));
    return m;
}

Message make_error(const Message& request, const std::string& what) {
    Message m;
    m.header = {{"op", request.header.value("op", std::string())},
                {"request_id", request.header.value("request_id", std::uint64_t{0})},
                {"error", what}};
    return m;
}

namespace {

Message reply(const Message& request, std::vector<Tensor> tensors) {
    Message m;
    m.header = {{"op", request.op()}, {"request_id", request.request_id()}};
    m.tensors = std::move(tensors);
    return m;
}

void expect_tensors(const Message& request, std::size_t n) {
    if (request.tensors.size() != n) throw ProtocolError("wrong number of tensors for " + request.op());
}

Message dispatch(ModelBackend& backend, const Message& request) {
    const std::string op = request.op();
    if (op == "encode_prompt") {
        expect_tensors(request, 0);
        const auto embedding = backend.encode_prompt(request.header.at("text").get<std::string>(),
                                                     request.header.at("style").get<std::string>());
        return reply(request, {to_tensor(embedding)});
    }
    if (op == "vae_encode") {
        expect_tensors(request, 1);
        return reply(request, {to_tensor(backend.vae_encode(to_rgb(request.tensors[0])))});
    }
    if (op == "vae_decode") {
        expect_tensors(request, 1);
        return reply(request, {to_tensor(backend.vae_decode(to_latent(request.tensors[0])))});
    }
    if (op == "extract_lines") {
        expect_tensors(request, 1);
        return reply(request, {to_tensor(backend.extract_lines(to_rgb(request.tensors[0])))});
    }
    if (op == "predict_noise") {
        const auto timesteps = request.header.at("timesteps").get<std::vector<int>>();
        const auto embed_index = request.header.at("embed_index").get<std::vector<std::size_t>>();
        const std::size_t n = timesteps.size();
        if (embed_index.size() != n || request.tensors.size() < n) throw ProtocolError("inconsistent predict_noise batch");
        std::vector<Latent> latents;
        for (std::size_t i = 0; i < n; ++i) latents.push_back(to_latent(request.tensors[i]));
        std::vector<PromptEmbedding> embeds;
        for (std::size_t i = n; i < request.tensors.size(); ++i) embeds.push_back(to_embedding(request.tensors[i]));
        std::vector<NoiseQuery> batch;
        for (std::size_t i = 0; i < n; ++i) {
            if (embed_index[i] >= embeds.size()) throw ProtocolError("embed_index out of range");
            batch.push_back({&latents[i], timesteps[i], &embeds[embed_index[i]]});
        }
        std::vector<Tensor> out;
        for (const auto& l : backend.predict_noise(batch)) out.push_back(to_tensor(l));
        return reply(request, std::move(out));
    }
    throw ProtocolError("unknown op '" + op + "'");
}

}  // namespace

Message handle_request(ModelBackend& backend, const Message& request) {
    try {
        return dispatch(backend, request);
    } catch (const std::exception& e) {
        return make_error(request, e.what());
    }
}

}  // namespace sketchguide::protocol
