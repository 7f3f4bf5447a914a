// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

// Backend wire protocol.
//
//   frame   = u32 little-endian payload length, payload
//   payload = JSON header, '\n', raw little-endian float32 tensor bytes
//
// The header carries {op, request_id, shapes, dtype:"f32"} plus op fields;
// tensors follow in the order of `shapes`. Responses echo op and request_id;
// a failed request answers with {op, request_id, error} and no tensors.
//
//   op             request tensors / fields              response tensors
//   encode_prompt  text, style                            [tokens,dim]
//   vae_encode     [H,W,3]                                [4,h,w]
//   vae_decode     [4,h,w]                                [H,W,3]
//   predict_noise  n×[4,h,w], m×[tokens,dim];             n×[4,h,w]
//                  timesteps[n], embed_index[n]
//   extract_lines  [H,W,3]                                [H,W]

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "sketchguide/backend.hpp"
#include "sketchguide/image.hpp"

namespace sketchguide::protocol {

inline constexpr std::uint32_t kMaxPayload = 256u << 20;

class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<float> data;

    std::size_t element_count() const;
    friend bool operator==(const Tensor&, const Tensor&) = default;
};

struct Message {
    nlohmann::json header = nlohmann::json::object();
    std::vector<Tensor> tensors;

    std::string op() const;
    std::uint64_t request_id() const;
    bool is_error() const { return header.contains("error"); }
};

/// Writes `shapes` and `dtype` into the header from the tensors.
std::vector<std::uint8_t> encode_payload(const Message& message);
Message decode_payload(std::span<const std::uint8_t> payload);

std::vector<std::uint8_t> encode_frame(const Message& message);
/// Decodes one complete frame; trailing bytes are an error.
Message decode_frame(std::span<const std::uint8_t> frame);

std::uint32_t read_u32_le(const std::uint8_t* p);
void write_u32_le(std::uint8_t* p, std::uint32_t v);

// Tensor conversions. Latents travel as f32; the receiver widens to double.
Tensor to_tensor(const Latent& latent);
Tensor to_tensor(const RgbImage& image);
Tensor to_tensor(const GrayImage& image);
Tensor to_tensor(const PromptEmbedding& embedding);
Latent to_latent(const Tensor& t);
RgbImage to_rgb(const Tensor& t);
GrayImage to_gray(const Tensor& t);
PromptEmbedding to_embedding(const Tensor& t);

// Request builders shared by the client and tests.
Message make_encode_prompt(std::uint64_t id, const std::string& text, const std::string& style);
Message make_vae_encode(std::uint64_t id, const RgbImage& image);
Message make_vae_decode(std::uint64_t id, const Latent& latent);
Message make_predict_noise(std::uint64_t id, std::span<const NoiseQuery> batch);
Message make_extract_lines(std::uint64_t id, const RgbImage& image);

Message make_error(const Message& request, const std::string& what);

/// Answers one request against a backend. Never throws: failures become
/// error responses.
Message handle_request(ModelBackend& backend, const Message& request);

}  // namespace sketchguide::protocol
