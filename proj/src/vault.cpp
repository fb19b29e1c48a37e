#include "mebface/vault.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "mebface/errors.hpp"

namespace mebface {
namespace {

void check_user_id(const std::string& user_id) {
  if (user_id.empty() || user_id.find_first_of("\t\r\n") != std::string::npos) {
    throw std::invalid_argument("vault: user id must be non-empty without tabs or newlines");
  }
}

std::uint64_t parse_uint(const std::string& field, const char* what) {
  std::uint64_t value = 0;
  const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || end != field.data() + field.size() || field.empty()) {
    throw FormatError(std::string("vault: bad ") + what + " '" + field + "'");
  }
  return value;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    parts.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

const ProtectedTemplate& Vault::enroll(const std::string& user_id, const MebCode& code,
                                       bool overwrite) {
  check_user_id(user_id);
  auto it = templates_.find(user_id);
  if (it != templates_.end() && !overwrite) throw DuplicateUserError(user_id);
  ProtectedTemplate tpl{user_id, hash_code(code), code.size(), 1};
  if (it != templates_.end()) {
    tpl.code_version = it->second.code_version + 1;
    it->second = tpl;
    return it->second;
  }
  return templates_.emplace(user_id, tpl).first->second;
}

std::pair<MebCode, ProtectedTemplate> Vault::reissue(const std::string& user_id, std::size_t bits,
                                                     Rng& rng) {
  if (!contains(user_id)) throw UnknownUserError(user_id);
  MebCode code = generate_code(bits, rng);
  const ProtectedTemplate tpl = enroll(user_id, code, true);
  return {std::move(code), tpl};
}

Vault Vault::from_templates(std::map<std::string, ProtectedTemplate> templates) {
  Vault vault;
  vault.templates_ = std::move(templates);
  return vault;
}

const ProtectedTemplate& Vault::at(const std::string& user_id) const {
  auto it = templates_.find(user_id);
  if (it == templates_.end()) throw UnknownUserError(user_id);
  return it->second;
}

std::string encode_vault(const Vault& vault) {
  std::string body = "MEBVAULT v" + std::to_string(Vault::kFormatVersion) + "\n";
  for (const auto& [id, tpl] : vault) {
    body += id + "\t" + std::to_string(tpl.code_bits) + "\t" + std::to_string(tpl.code_version) +
            "\t" + to_hex(tpl.digest) + "\n";
  }
  const auto crc = crc32(std::span(reinterpret_cast<const std::uint8_t*>(body.data()), body.size()));
  char trailer[32];
  std::snprintf(trailer, sizeof(trailer), "CRC32 %08x\n", crc);
  return body + trailer;
}

Vault decode_vault(const std::string& text) {
  // Checksum first so a damaged file is rejected before any entry is parsed.
  if (text.empty() || text.back() != '\n') throw FormatError("vault: truncated file");
  const auto trailer_start = text.rfind('\n', text.size() - 2);
  if (trailer_start == std::string::npos) throw FormatError("vault: missing checksum line");
  const std::string body = text.substr(0, trailer_start + 1);
  const std::string trailer = text.substr(trailer_start + 1, text.size() - trailer_start - 2);
  if (trailer.size() != 14 || trailer.rfind("CRC32 ", 0) != 0) {
    throw ChecksumError("vault: malformed checksum line");
  }
  std::uint32_t stored = 0;
  const auto [end, ec] = std::from_chars(trailer.data() + 6, trailer.data() + 14, stored, 16);
  if (ec != std::errc() || end != trailer.data() + 14) throw ChecksumError("vault: malformed checksum");
  if (stored != crc32(std::span(reinterpret_cast<const std::uint8_t*>(body.data()), body.size()))) {
    throw ChecksumError("vault: checksum mismatch");
  }

  std::istringstream in(body);
  std::string line;
  std::getline(in, line);
  const std::string expected = "MEBVAULT v" + std::to_string(Vault::kFormatVersion);
  if (line != expected) {
    if (line.rfind("MEBVAULT v", 0) == 0) throw FormatError("vault: unsupported version '" + line + "'");
    throw FormatError("vault: missing MEBVAULT header");
  }
  std::map<std::string, ProtectedTemplate> entries;
  while (std::getline(in, line)) {
    const auto fields = split(line, '\t');
    if (fields.size() != 4) throw FormatError("vault: expected 4 tab-separated fields");
    ProtectedTemplate tpl;
    tpl.user_id = fields[0];
    tpl.code_bits = static_cast<std::size_t>(parse_uint(fields[1], "code length"));
    tpl.code_version = parse_uint(fields[2], "version");
    const auto digest = from_hex(fields[3]);
    if (digest.size() != tpl.digest.size()) throw FormatError("vault: digest must be 64 bytes");
    std::copy(digest.begin(), digest.end(), tpl.digest.begin());
    try {
      check_user_id(tpl.user_id);
      MebCode::validate_length(tpl.code_bits);
    } catch (const std::invalid_argument& e) {
      throw FormatError(e.what());
    }
    if (tpl.code_version == 0) throw FormatError("vault: version must be >= 1");
    if (!entries.emplace(tpl.user_id, tpl).second) {
      throw FormatError("vault: duplicate user '" + tpl.user_id + "'");
    }
  }
  return Vault::from_templates(std::move(entries));
}

void persist(const Vault& vault, const std::filesystem::path& path) {
  const std::string text = encode_vault(vault);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw FileError("cannot write vault: " + path.string());
    out << text;
    if (!out.flush()) throw FileError("cannot write vault: " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

Vault load_vault(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open vault: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_vault(ss.str());
}

}  // namespace mebface
