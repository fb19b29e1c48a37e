#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "mebface/codes.hpp"
#include "mebface/hash.hpp"
#include "mebface/image.hpp"
#include "mebface/illumination.hpp"
#include "mebface/network.hpp"
#include "mebface/vault.hpp"

namespace mebface {

/// Fraction of crop digests equal to a stored template, kept as an exact
/// ratio.
struct MatchScore {
  std::size_t matches = 0;
  std::size_t total = 0;

  double value() const { return total == 0 ? 0.0 : static_cast<double>(matches) / static_cast<double>(total); }
  friend bool operator==(const MatchScore&, const MatchScore&) = default;
};

struct VerifyResult {
  std::string user_id;
  MatchScore score;
  double threshold = 0.0;
  bool accept = false;
};

/// Anything that maps a preprocessed m x m crop to K outputs in [0, 1].
class CodeEncoder {
 public:
  virtual ~CodeEncoder() = default;
  virtual std::size_t code_bits() const = 0;
  virtual Vector encode(const GrayImage& crop) const = 0;
};

/// The trained network in inference mode.
class NetworkEncoder final : public CodeEncoder {
 public:
  explicit NetworkEncoder(const NetworkParams& params) : params_(params) {}
  std::size_t code_bits() const override { return params_.arch.code_bits; }
  Vector encode(const GrayImage& crop) const override;

 private:
  const NetworkParams& params_;
};

/// s_i = 1 iff t_i > 0.5; exactly 0.5 maps to 0.
MebCode binarize(std::span<const double> outputs);

/// Crop/flip, illumination-normalize, encode and binarize every crop.
std::vector<MebCode> crop_codes(const GrayImage& sample, const CodeEncoder& encoder,
                                const AugmentConfig& cfg);
/// SHA-512 of each entry of crop_codes, in the same order.
std::vector<Digest> crop_digests(const GrayImage& sample, const CodeEncoder& encoder,
                                 const AugmentConfig& cfg);

MatchScore score_digests(std::span<const Digest> digests, const ProtectedTemplate& tpl);

MatchScore score_verify(const GrayImage& sample, const std::string& user_id,
                        const CodeEncoder& encoder, const Vault& vault, const AugmentConfig& cfg);

/// All enrolled users ranked by score (descending), ties by user id.
std::vector<std::pair<std::string, MatchScore>> rank_digests(std::span<const Digest> digests,
                                                             const Vault& vault);
std::vector<std::pair<std::string, MatchScore>> identify(const GrayImage& sample,
                                                         const CodeEncoder& encoder,
                                                         const Vault& vault,
                                                         const AugmentConfig& cfg);

/// Accept iff score >= threshold (and at least one crop was scored).
bool decide(const MatchScore& score, double threshold);

VerifyResult verify(const GrayImage& sample, const std::string& user_id, const CodeEncoder& encoder,
                    const Vault& vault, const AugmentConfig& cfg, double threshold);

}  // namespace mebface
