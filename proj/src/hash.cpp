#include "mebface/hash.hpp"

#include <openssl/evp.h>
#include <zlib.h>

#include <memory>
#include <stdexcept>

namespace mebface {

Digest sha512(std::span<const std::uint8_t> message) {
  Digest digest{};
  unsigned int length = 0;
  if (EVP_Digest(message.data(), message.size(), digest.data(), &length, EVP_sha512(), nullptr) != 1 ||
      length != digest.size()) {
    throw std::runtime_error("sha512: digest computation failed");
  }
  return digest;
}

Digest sha512(std::string_view message) {
  return sha512(std::span(reinterpret_cast<const std::uint8_t*>(message.data()), message.size()));
}

Digest hash_code(const MebCode& code) { return sha512(serialize_bits(code)); }

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; chunk to stay within range
  std::size_t offset = 0;
  while (offset < bytes.size()) {
    const std::size_t chunk = std::min<std::size_t>(bytes.size() - offset, 1u << 30);
    crc = ::crc32(crc, bytes.data() + offset, static_cast<uInt>(chunk));
    offset += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace mebface
