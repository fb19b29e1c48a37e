#include "mebface/matcher.hpp"

#include <algorithm>
#include <stdexcept>

namespace mebface {

Vector NetworkEncoder::encode(const GrayImage& crop) const { return network_infer(to_network_input(crop), params_); }

MebCode binarize(std::span<const double> outputs) {
  std::vector<std::uint8_t> bits(outputs.size());
  for (std::size_t i = 0; i < outputs.size(); ++i) bits[i] = outputs[i] > 0.5 ? 1 : 0;
  return MebCode(std::move(bits));
}

std::vector<MebCode> crop_codes(const GrayImage& sample, const CodeEncoder& encoder,
                                const AugmentConfig& cfg) {
  const auto crops = crops_all(sample, cfg);
  std::vector<MebCode> codes;
  codes.reserve(crops.size());
  for (const auto& c : crops) {
    const Vector outputs = encoder.encode(illum_normalize(c));
    if (outputs.size() != encoder.code_bits()) throw ShapeError("encoder returned wrong code length");
    codes.push_back(binarize(outputs));
  }
  return codes;
}

std::vector<Digest> crop_digests(const GrayImage& sample, const CodeEncoder& encoder,
                                 const AugmentConfig& cfg) {
  const auto codes = crop_codes(sample, encoder, cfg);
  std::vector<Digest> digests;
  digests.reserve(codes.size());
  for (const auto& code : codes) digests.push_back(hash_code(code));
  return digests;
}

MatchScore score_digests(std::span<const Digest> digests, const ProtectedTemplate& tpl) {
  MatchScore score{0, digests.size()};
  for (const auto& d : digests) score.matches += d == tpl.digest ? 1 : 0;
  return score;
}

MatchScore score_verify(const GrayImage& sample, const std::string& user_id,
                        const CodeEncoder& encoder, const Vault& vault, const AugmentConfig& cfg) {
  const ProtectedTemplate& tpl = vault.at(user_id);
  if (tpl.code_bits != encoder.code_bits()) {
    throw ShapeError("template for " + user_id + " has K=" + std::to_string(tpl.code_bits) +
                     " but the network produces K=" + std::to_string(encoder.code_bits()));
  }
  return score_digests(crop_digests(sample, encoder, cfg), tpl);
}

std::vector<std::pair<std::string, MatchScore>> rank_digests(std::span<const Digest> digests,
                                                             const Vault& vault) {
  if (vault.empty()) throw std::invalid_argument("identify: vault is empty");
  std::vector<std::pair<std::string, MatchScore>> ranking;
  ranking.reserve(vault.size());
  for (const auto& [id, tpl] : vault) ranking.emplace_back(id, score_digests(digests, tpl));
  // integer cross-multiplication keeps the ordering exact
  std::stable_sort(ranking.begin(), ranking.end(), [](const auto& a, const auto& b) {
    const auto lhs = a.second.matches * b.second.total;
    const auto rhs = b.second.matches * a.second.total;
    if (lhs != rhs) return lhs > rhs;
    return a.first < b.first;
  });
  return ranking;
}

std::vector<std::pair<std::string, MatchScore>> identify(const GrayImage& sample,
                                                         const CodeEncoder& encoder,
                                                         const Vault& vault,
                                                         const AugmentConfig& cfg) {
  if (vault.empty()) throw std::invalid_argument("identify: vault is empty");
  for (const auto& [id, tpl] : vault) {
    if (tpl.code_bits != encoder.code_bits()) throw ShapeError("template K does not match network");
  }
  const auto digests = crop_digests(sample, encoder, cfg);
  return rank_digests(digests, vault);
}

bool decide(const MatchScore& score, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw std::invalid_argument("threshold must lie in [0, 1]");
  return score.total > 0 && score.value() >= threshold;
}

VerifyResult verify(const GrayImage& sample, const std::string& user_id, const CodeEncoder& encoder,
                    const Vault& vault, const AugmentConfig& cfg, double threshold) {
  VerifyResult result{user_id, score_verify(sample, user_id, encoder, vault, cfg), threshold, false};
  result.accept = decide(result.score, threshold);
  return result;
}

}  // namespace mebface
