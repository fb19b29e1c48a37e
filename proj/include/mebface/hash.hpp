#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

#include "mebface/codes.hpp"

namespace mebface {

using Digest = std::array<std::uint8_t, 64>;

/// SHA-512 (FIPS 180-4).
Digest sha512(std::span<const std::uint8_t> message);
Digest sha512(std::string_view message);

/// SHA-512 over the MSB-first packed code bytes; no salt, no user id.
Digest hash_code(const MebCode& code);

/// zlib CRC-32 (IEEE 802.3 polynomial).
std::uint32_t crc32(std::span<const std::uint8_t> bytes);

}  // namespace mebface
