#include "mebface/codes.hpp"

#include <fstream>
#include <sstream>

#include "mebface/errors.hpp"

namespace mebface {

MebCode::MebCode(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  validate_length(bits_.size());
  for (std::uint8_t b : bits_) {
    if (b > 1) throw std::invalid_argument("MebCode: bits must be 0 or 1");
  }
}

void MebCode::validate_length(std::size_t bits) {
  if (bits < 8 || bits % 8 != 0) {
    throw std::invalid_argument("code length must be a positive multiple of 8, got " +
                                std::to_string(bits));
  }
}

Vector MebCode::targets() const { return Vector(bits_.begin(), bits_.end()); }

MebCode MebCode::with_flipped_bit(std::size_t i) const {
  auto bits = bits_;
  bits.at(i) ^= 1;
  return MebCode(std::move(bits));
}

MebCode MebCode::complement() const {
  auto bits = bits_;
  for (auto& b : bits) b ^= 1;
  return MebCode(std::move(bits));
}

MebCode generate_code(std::size_t bits, Rng& rng) {
  MebCode::validate_length(bits);
  std::vector<std::uint8_t> out(bits);
  for (auto& b : out) b = rng.bit() ? 1 : 0;
  return MebCode(std::move(out));
}

std::size_t hamming(const MebCode& a, const MebCode& b) {
  if (a.size() != b.size()) throw ShapeError("hamming: code lengths differ");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

std::vector<std::uint8_t> serialize_bits(const MebCode& code) {
  MebCode::validate_length(code.size());
  std::vector<std::uint8_t> bytes(code.size() / 8, 0);
  for (std::size_t j = 0; j < code.size(); ++j) {
    bytes[j / 8] |= static_cast<std::uint8_t>(code[j] << (7 - j % 8));
  }
  return bytes;
}

MebCode deserialize_bits(std::span<const std::uint8_t> bytes) {
  std::vector<std::uint8_t> bits(bytes.size() * 8);
  for (std::size_t j = 0; j < bits.size(); ++j) bits[j] = (bytes[j / 8] >> (7 - j % 8)) & 1;
  return MebCode(std::move(bits));
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

std::vector<std::uint8_t> from_hex(const std::string& hex) {
  if (hex.size() % 2 != 0) throw FormatError("hex: odd length");
  auto nibble = [](char c) -> std::uint8_t {
    if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
    throw FormatError(std::string("hex: invalid digit '") + c + "'");
  };
  std::vector<std::uint8_t> out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
  }
  return out;
}

bool CodeBook::contains_code(const MebCode& code) const {
  for (const auto& [id, c] : codes_) {
    if (c == code) return true;
  }
  return false;
}

void CodeBook::add(const std::string& user_id, MebCode code) {
  if (code.size() != bits_) throw std::invalid_argument("codebook: code length mismatch");
  if (codes_.contains(user_id)) throw DuplicateUserError(user_id);
  if (contains_code(code)) throw std::invalid_argument("codebook: code already assigned");
  codes_.emplace(user_id, std::move(code));
}

const MebCode& CodeBook::at(const std::string& user_id) const {
  auto it = codes_.find(user_id);
  if (it == codes_.end()) throw UnknownUserError(user_id);
  return it->second;
}

std::vector<std::string> CodeBook::user_ids() const {
  std::vector<std::string> ids;
  ids.reserve(codes_.size());
  for (const auto& [id, code] : codes_) ids.push_back(id);
  return ids;
}

CodeBook generate_codebook(std::span<const std::string> user_ids, std::size_t bits, Rng& rng) {
  return generate_codebook(user_ids, bits, [&rng](std::size_t k) { return generate_code(k, rng); });
}

CodeBook generate_codebook(std::span<const std::string> user_ids, std::size_t bits,
                           const CodeSource& source) {
  CodeBook book(bits);
  for (const auto& id : user_ids) {
    if (book.contains(id)) throw DuplicateUserError(id);
  }
  for (const auto& id : user_ids) {
    MebCode code = source(bits);
    while (book.contains_code(code)) code = source(bits);
    book.add(id, std::move(code));
  }
  return book;
}

std::string export_codebook(const CodeBook& book) {
  std::string out = "MEBCODES v1\n";
  for (const auto& [id, code] : book) out += id + "\t" + to_hex(serialize_bits(code)) + "\n";
  return out;
}

CodeBook import_codebook(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "MEBCODES v1") {
    throw FormatError("codebook: missing 'MEBCODES v1' header");
  }
  std::vector<std::pair<std::string, MebCode>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) throw FormatError("codebook: malformed line");
    try {
      rows.emplace_back(line.substr(0, tab), deserialize_bits(from_hex(line.substr(tab + 1))));
    } catch (const std::invalid_argument& e) {
      throw FormatError(std::string("codebook: ") + e.what());
    }
  }
  if (rows.empty()) throw FormatError("codebook: no entries");
  CodeBook book(rows.front().second.size());
  for (auto& [id, code] : rows) {
    try {
      book.add(id, std::move(code));
    } catch (const std::invalid_argument& e) {
      throw FormatError(std::string("codebook: ") + e.what());
    }
  }
  return book;
}

void save_codebook(const CodeBook& book, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("cannot write codebook: " + path.string());
  out << export_codebook(book);
}

CodeBook load_codebook(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open codebook: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return import_codebook(ss.str());
}

}  // namespace mebface
