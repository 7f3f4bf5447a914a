// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

#include "sketchguide/encoding.hpp"

#include <boost/beast/core/detail/base64.hpp>

#include "sketchguide/image.hpp"

namespace sketchguide {

namespace b64 = boost::beast::detail::base64;

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    std::string out(b64::encoded_size(bytes.size()), '\0');
    out.resize(b64::encode(out.data(), bytes.data(), bytes.size()));
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
    // decoded_size rounds down, so a ragged tail would overrun the buffer.
    require(text.size() % 4 == 0, "base64: malformed input");
    std::vector<std::uint8_t> out(b64::decoded_size(text.size()));
    const auto [written, read] = b64::decode(out.data(), text.data(), text.size());
    // Decoding stops at the first '='; only padding may follow it.
    const std::string_view rest = text.substr(read);
    require(rest.size() <= 2 && rest.find_first_not_of('=') == std::string_view::npos, "base64: malformed input");
    out.resize(written);
    return out;
}

}  // namespace sketchguide
