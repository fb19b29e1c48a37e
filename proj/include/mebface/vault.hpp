#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>

#include "mebface/codes.hpp"
#include "mebface/hash.hpp"
#include "mebface/rng.hpp"

namespace mebface {

struct ProtectedTemplate {
  std::string user_id;
  Digest digest{};
  std::size_t code_bits = 0;
  /// Starts at 1, incremented by every overwrite or reissue.
  std::uint64_t code_version = 0;

  friend bool operator==(const ProtectedTemplate&, const ProtectedTemplate&) = default;
};

/// Store of protected templates, at most one per user. Codes passed in are
/// hashed immediately and never retained.
class Vault {
 public:
  static constexpr int kFormatVersion = 1;

  const ProtectedTemplate& enroll(const std::string& user_id, const MebCode& code,
                                  bool overwrite = false);

  /// Draws a fresh code, replaces the stored digest and bumps the version.
  /// The new code is handed back for retraining and is not kept here.
  std::pair<MebCode, ProtectedTemplate> reissue(const std::string& user_id, std::size_t bits,
                                                Rng& rng);

  bool contains(const std::string& user_id) const { return templates_.contains(user_id); }
  const ProtectedTemplate& at(const std::string& user_id) const;
  std::size_t size() const noexcept { return templates_.size(); }
  bool empty() const noexcept { return templates_.empty(); }

  auto begin() const { return templates_.begin(); }
  auto end() const { return templates_.end(); }

  /// Rebuilds a vault from already-validated entries (used by the loader).
  static Vault from_templates(std::map<std::string, ProtectedTemplate> templates);

  friend bool operator==(const Vault&, const Vault&) = default;

 private:
  std::map<std::string, ProtectedTemplate> templates_;
};

/// Text format:
///   MEBVAULT v1
///   user_id<TAB>K<TAB>version<TAB>hex_digest     (one line per user, sorted)
///   CRC32 <8 lowercase hex digits>               (over all preceding bytes)
std::string encode_vault(const Vault& vault);
Vault decode_vault(const std::string& text);

void persist(const Vault& vault, const std::filesystem::path& path);
Vault load_vault(const std::filesystem::path& path);

}  // namespace mebface
