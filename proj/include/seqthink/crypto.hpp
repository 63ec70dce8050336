#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace seqthink {

/// SHA-256 digest bytes.
using Digest = std::array<std::uint8_t, 32>;

Digest sha256(std::span<const std::uint8_t> bytes);
Digest sha256(std::string_view bytes);

std::string to_hex(std::span<const std::uint8_t> bytes);

/// Parses exactly 64 hex characters. Throws std::invalid_argument otherwise.
Digest digest_from_hex(std::string_view hex);

}  // namespace seqthink
