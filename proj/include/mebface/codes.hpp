#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mebface/rng.hpp"
#include "mebface/tensor.hpp"

namespace mebface {

/// K independent bits assigned to one user. K is a positive multiple of 8.
class MebCode {
 public:
  MebCode() = default;
  explicit MebCode(std::vector<std::uint8_t> bits);

  static void validate_length(std::size_t bits);

  std::size_t size() const noexcept { return bits_.size(); }
  std::uint8_t operator[](std::size_t i) const { return bits_[i]; }
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }

  /// Bits as 0.0 / 1.0 training targets.
  Vector targets() const;
  MebCode with_flipped_bit(std::size_t i) const;
  MebCode complement() const;

  friend bool operator==(const MebCode&, const MebCode&) = default;
  friend auto operator<=>(const MebCode&, const MebCode&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

/// Draws each bit from Bernoulli(0.5). Consumes only the rng.
MebCode generate_code(std::size_t bits, Rng& rng);

std::size_t hamming(const MebCode& a, const MebCode& b);

/// Packs MSB-first: bit j goes to byte j/8 at position 7 - j%8.
std::vector<std::uint8_t> serialize_bits(const MebCode& code);
MebCode deserialize_bits(std::span<const std::uint8_t> bytes);

std::string to_hex(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> from_hex(const std::string& hex);

/// User id -> code, all codes of equal length and pairwise distinct.
class CodeBook {
 public:
  explicit CodeBook(std::size_t bits = 256) : bits_(bits) { MebCode::validate_length(bits); }

  std::size_t bits() const noexcept { return bits_; }
  std::size_t size() const noexcept { return codes_.size(); }
  bool empty() const noexcept { return codes_.empty(); }
  bool contains(const std::string& user_id) const { return codes_.contains(user_id); }
  bool contains_code(const MebCode& code) const;

  /// Throws DuplicateUserError, or std::invalid_argument on length mismatch
  /// or a code already assigned to another user.
  void add(const std::string& user_id, MebCode code);
  const MebCode& at(const std::string& user_id) const;
  std::vector<std::string> user_ids() const;

  auto begin() const { return codes_.begin(); }
  auto end() const { return codes_.end(); }

 private:
  std::size_t bits_;
  std::map<std::string, MebCode> codes_;
};

using CodeSource = std::function<MebCode(std::size_t bits)>;

/// One fresh code per user; a code that collides with an earlier one is
/// redrawn.
CodeBook generate_codebook(std::span<const std::string> user_ids, std::size_t bits, Rng& rng);
CodeBook generate_codebook(std::span<const std::string> user_ids, std::size_t bits,
                           const CodeSource& source);

/// "MEBCODES v1" header, then one `user_id<TAB>hex(bits)` line per user.
std::string export_codebook(const CodeBook& book);
CodeBook import_codebook(const std::string& text);
void save_codebook(const CodeBook& book, const std::filesystem::path& path);
CodeBook load_codebook(const std::filesystem::path& path);

}  // namespace mebface
