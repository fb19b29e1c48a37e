#include "mebface/protocol.hpp"

#include <map>
#include <stdexcept>

#include "mebface/errors.hpp"
#include "mebface/illumination.hpp"
#include "mebface/metrics.hpp"

namespace mebface {
namespace {

enum Stream : std::uint64_t { kSplitStream = 11, kCodeStream = 12, kTrainStream = 13, kAttackStream = 14 };

}  // namespace

std::vector<double> score_values(std::span<const MatchScore> scores) {
  std::vector<double> values;
  values.reserve(scores.size());
  for (const auto& s : scores) values.push_back(s.value());
  return values;
}

GrayImage to_working_size(const GrayImage& image, const AugmentConfig& cfg) {
  return resize(image, cfg.working_size);
}

std::vector<TrainingSample> build_training_set(const Dataset& images, const AugmentConfig& cfg) {
  std::vector<TrainingSample> samples;
  samples.reserve(images.size() * cfg.crop_count());
  for (const auto& item : images) {
    for (const auto& c : crops_all(to_working_size(item.image, cfg), cfg)) {
      samples.push_back({to_network_input(illum_normalize(c)), item.user_id});
    }
  }
  return samples;
}

ScoreSets collect_scores(const CodeEncoder& encoder, const Vault& vault, const Dataset& test,
                         const AugmentConfig& cfg) {
  for (const auto& item : test) {
    if (!vault.contains(item.user_id)) throw UnknownUserError(item.user_id);
  }
  ScoreSets sets;
  for (const auto& item : test) {
    const auto digests = crop_digests(to_working_size(item.image, cfg), encoder, cfg);
    for (const auto& [id, tpl] : vault) {
      (id == item.user_id ? sets.genuine : sets.imposter).push_back(score_digests(digests, tpl));
    }
  }
  return sets;
}

AttackResult attack_sim(const CodeEncoder& encoder, const Vault& vault, const AugmentConfig& cfg,
                        std::size_t noise_count, const Dataset& unseen, Rng& rng) {
  AttackResult result;
  if (noise_count == 0 && unseen.empty()) return result;
  if (vault.empty()) throw std::invalid_argument("attack_sim: vault is empty");
  result.noise.reserve(noise_count * vault.size());
  for (std::size_t p = 0; p < noise_count; ++p) {
    GrayImage probe(cfg.working_size, cfg.working_size);
    for (double& v : probe.pixels()) v = rng.uniform();
    const auto digests = crop_digests(probe, encoder, cfg);
    for (const auto& [id, tpl] : vault) result.noise.push_back(score_digests(digests, tpl));
  }
  for (const auto& item : unseen) {
    const auto digests = crop_digests(to_working_size(item.image, cfg), encoder, cfg);
    for (const auto& [id, tpl] : vault) result.unseen.push_back(score_digests(digests, tpl));
  }
  return result;
}

std::vector<std::size_t> EvalReport::genuine_histogram() const {
  return lattice_histogram(score_values(genuine), crops_per_sample);
}
std::vector<std::size_t> EvalReport::imposter_histogram() const {
  return lattice_histogram(score_values(imposter), crops_per_sample);
}
std::vector<std::size_t> EvalReport::attack_histogram() const {
  return lattice_histogram(score_values(attack), crops_per_sample);
}

EvalReport run_protocol(const Dataset& dataset, const ProtocolConfig& config, const ProgressFn& progress) {
  config.augment.validate();
  config.arch.validate();
  if (config.splits == 0) throw std::invalid_argument("protocol: need at least one split");
  if (config.arch.input_size != config.augment.working_size) {
    throw ShapeError("protocol: network input size differs from augmentation working size");
  }
  auto say = [&](const std::string& msg) {
    if (progress) progress(msg);
  };

  EvalReport report;
  report.crops_per_sample = config.augment.crop_count();
  const auto users = user_ids(dataset);
  std::vector<double> gars, eers;

  for (std::size_t split = 0; split < config.splits; ++split) {
    Rng split_rng(mix_seed(config.seed, split));
    Rng partition_rng = split_rng.derive(kSplitStream);
    auto [train, test] = split_train_test(dataset, config.train_per_user, partition_rng);

    Dataset validation;
    if (config.validation_per_user > 0) {
      if (config.validation_per_user >= config.train_per_user) {
        throw std::invalid_argument("protocol: validation count must be below train_per_user");
      }
      std::map<std::string, std::size_t> taken;
      Dataset kept;
      for (auto& item : train) {
        (taken[item.user_id]++ < config.validation_per_user ? validation : kept).push_back(std::move(item));
      }
      train = std::move(kept);
    }

    Rng code_rng = split_rng.derive(kCodeStream);
    SplitMetrics metrics;
    NetworkParams params;
    Vault vault;
    {
      // codes live only for the duration of training and enrollment
      const CodeBook codes = generate_codebook(users, config.arch.code_bits, code_rng);
      const auto train_set = build_training_set(train, config.augment);
      const auto val_set = build_training_set(validation, config.augment);
      say("split " + std::to_string(split) + ": training on " + std::to_string(train_set.size()) + " crops");
      Rng train_rng = split_rng.derive(kTrainStream);
      auto trained = sgd_train(train_set, codes, config.train, config.arch, train_rng, val_set,
                               [&](std::size_t epoch, double loss, double val) {
                                 say("  epoch " + std::to_string(epoch + 1) + " loss " + std::to_string(loss) +
                                     (val_set.empty() ? "" : " val " + std::to_string(val)));
                               });
      params = std::move(trained.params);
      metrics.epoch_loss = std::move(trained.epoch_loss);
      metrics.validation_loss = std::move(trained.validation_loss);
      for (const auto& [id, code] : codes) vault.enroll(id, code);
    }

    const NetworkEncoder encoder(params);
    const ScoreSets scores = collect_scores(encoder, vault, test, config.augment);
    const auto genuine = score_values(scores.genuine);
    const auto imposter = score_values(scores.imposter);
    metrics.gar_at_zero_far = gar_at_zero_far(genuine, imposter);
    metrics.eer = compute_eer(genuine, imposter);
    say("split " + std::to_string(split) + ": GAR@0FAR " + std::to_string(metrics.gar_at_zero_far) +
        "% EER " + std::to_string(metrics.eer) + "%");
    gars.push_back(metrics.gar_at_zero_far);
    eers.push_back(metrics.eer);
    report.genuine.insert(report.genuine.end(), scores.genuine.begin(), scores.genuine.end());
    report.imposter.insert(report.imposter.end(), scores.imposter.begin(), scores.imposter.end());

    if (split == 0 && config.attack_noise > 0) {
      say("split 0: attack simulation with " + std::to_string(config.attack_noise) + " noise probes");
      Rng attack_rng = split_rng.derive(kAttackStream);
      report.attack = attack_sim(encoder, vault, config.augment, config.attack_noise, {}, attack_rng).noise;
    }
    report.splits.push_back(std::move(metrics));
  }

  const MeanStd gar = mean_std(gars);
  const MeanStd eer = mean_std(eers);
  report.gar_mean = gar.mean;
  report.gar_std = gar.stddev;
  report.eer_mean = eer.mean;
  report.eer_std = eer.stddev;
  return report;
}

}  // namespace mebface
