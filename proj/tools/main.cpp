// mebface command-line tool. Every option lives on the top-level app so a
// flat key=value config file can set any of them; subcommands fall through.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include "mebface/codes.hpp"
#include "mebface/dataset.hpp"
#include "mebface/errors.hpp"
#include "mebface/gradient_check.hpp"
#include "mebface/matcher.hpp"
#include "mebface/network.hpp"
#include "mebface/protocol.hpp"
#include "mebface/report.hpp"
#include "mebface/trainer.hpp"
#include "mebface/vault.hpp"

namespace fs = std::filesystem;
using namespace mebface;

namespace {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kBadConfig = 3,
  kMissingFile = 4,
  kBadFormat = 5,
  kUnknownUser = 6,
  kDuplicateUser = 7,
  kCheckFailed = 8,
};

struct Options {
  // paths
  std::string dataset;
  std::string codes;
  std::string params;
  std::string vault;
  std::string image;
  std::string report;
  std::string unseen;
  std::string out;
  std::string user;

  // synthetic data
  SynthSpec synth;

  // network and codes
  Architecture arch;
  AugmentConfig augment;
  TrainConfig train;

  // seeds
  std::uint64_t code_seed = 0;
  std::uint64_t train_seed = 0;
  std::uint64_t seed = 0;
  std::uint64_t attack_seed = 0;

  // protocol
  std::size_t train_per_user = 10;
  std::size_t validation_per_user = 0;
  std::size_t splits = 10;
  std::size_t attack_noise = 0;
  std::size_t noise = 10000;

  // matching
  double threshold = 0.5;
  std::size_t top = 0;
  bool keep_codes = false;
  bool overwrite = false;
  bool no_flip = false;
  bool quiet = false;

  // gradient check
  std::size_t cases = 1;
  double epsilon = 1e-4;
  double tolerance = 1e-4;
};

class CliError : public std::runtime_error {
 public:
  CliError(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
  int code() const noexcept { return code_; }

 private:
  int code_;
};

void require(const std::string& value, const std::string& flag) {
  if (value.empty()) throw CliError(kBadConfig, "missing required option " + flag);
}

void require_exists(const std::string& path, const std::string& flag) {
  require(path, flag);
  if (!fs::exists(path)) throw FileError("no such file: " + path);
}

void progress(const Options& o, const std::string& msg) {
  if (!o.quiet) std::cerr << msg << '\n';
}

AugmentConfig augment_for(const Options& o, std::size_t working_size) {
  AugmentConfig cfg = o.augment;
  cfg.working_size = working_size;
  cfg.flip = !o.no_flip;
  cfg.validate();
  return cfg;
}

Architecture architecture(const Options& o, std::size_t code_bits) {
  Architecture arch = o.arch;
  arch.input_size = o.augment.working_size;
  arch.code_bits = code_bits;
  arch.validate();
  return arch;
}

Dataset resized(const Dataset& ds, const AugmentConfig& cfg) {
  Dataset out;
  out.reserve(ds.size());
  for (const auto& item : ds) out.push_back({item.user_id, to_working_size(item.image, cfg)});
  return out;
}

void check_k(const NetworkParams& params, const Vault& vault) {
  for (const auto& [id, tpl] : vault) {
    if (tpl.code_bits != params.arch.code_bits) {
      throw ShapeError("vault K=" + std::to_string(tpl.code_bits) + " for " + id + " but network K=" +
                       std::to_string(params.arch.code_bits));
    }
  }
}

std::string rational(const MatchScore& s) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%zu/%zu (%.6f)", s.matches, s.total, s.value());
  return buf;
}

int cmd_synth_data(const Options& o) {
  require(o.out, "--out");
  SynthSpec spec = o.synth;
  spec.image_size = o.augment.working_size;
  const auto ds = gen_synth_dataset(spec);
  save_dataset(ds, o.out);
  std::printf("wrote %zu images of %zu users to %s\n", ds.size(), spec.num_users, o.out.c_str());
  return kOk;
}

int cmd_gen_codes(const Options& o) {
  require_exists(o.dataset, "--dataset");
  require(o.codes, "--codes");
  MebCode::validate_length(o.arch.code_bits);
  const auto ids = user_ids(load_dataset(o.dataset));
  Rng rng(o.code_seed);
  const auto book = generate_codebook(ids, o.arch.code_bits, rng);
  save_codebook(book, o.codes);
  std::printf("wrote %zu codes of %zu bits to %s\n", book.size(), o.arch.code_bits, o.codes.c_str());
  return kOk;
}

int cmd_train(const Options& o) {
  require_exists(o.dataset, "--dataset");
  require_exists(o.codes, "--codes");
  require(o.params, "--params");
  const auto book = load_codebook(o.codes);
  if (book.empty()) throw CliError(kBadConfig, "codebook is empty");
  const std::size_t k = book.begin()->second.size();
  const auto arch = architecture(o, k);
  const auto cfg = augment_for(o, arch.input_size);
  const auto samples = build_training_set(resized(load_dataset(o.dataset), cfg), cfg);
  progress(o, "training on " + std::to_string(samples.size()) + " crops");
  Rng rng(o.train_seed);
  const auto result = sgd_train(samples, book, o.train, arch, rng, {}, [&](std::size_t epoch, double loss, double) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "epoch %zu loss %.6f", epoch + 1, loss);
    std::printf("%s\n", buf);
    std::fflush(stdout);
  });
  save_params(result.params, o.params);
  std::printf("wrote %zu parameters to %s\n", result.params.parameter_count(), o.params.c_str());
  return kOk;
}

int cmd_enroll(const Options& o) {
  require_exists(o.codes, "--codes");
  require(o.vault, "--vault");
  const auto book = load_codebook(o.codes);
  Vault vault = fs::exists(o.vault) ? load_vault(o.vault) : Vault{};
  for (const auto& [id, code] : book) vault.enroll(id, code, o.overwrite);
  persist(vault, o.vault);
  std::printf("enrolled %zu users into %s\n", book.size(), o.vault.c_str());
  if (!o.keep_codes) {
    fs::remove(o.codes);
    std::printf("removed codebook %s\n", o.codes.c_str());
  }
  return kOk;
}

struct Matcher {
  NetworkParams params;
  Vault vault;
  AugmentConfig cfg;
};

Matcher load_matcher(const Options& o) {
  require_exists(o.params, "--params");
  require_exists(o.vault, "--vault");
  Matcher m{load_params(o.params), load_vault(o.vault), {}};
  check_k(m.params, m.vault);
  m.cfg = augment_for(o, m.params.arch.input_size);
  return m;
}

int cmd_verify(const Options& o) {
  require(o.user, "--user");
  require_exists(o.image, "--image");
  const auto m = load_matcher(o);
  if (!m.vault.contains(o.user)) throw UnknownUserError(o.user);
  const NetworkEncoder enc(m.params);
  const auto sample = to_working_size(load_image(o.image), m.cfg);
  const auto r = verify(sample, o.user, enc, m.vault, m.cfg, o.threshold);
  std::printf("user %s score %s threshold %.6f %s\n", o.user.c_str(), rational(r.score).c_str(), o.threshold,
              r.accept ? "accept" : "reject");
  return kOk;
}

int cmd_identify(const Options& o) {
  require_exists(o.image, "--image");
  const auto m = load_matcher(o);
  const NetworkEncoder enc(m.params);
  const auto ranked = identify(to_working_size(load_image(o.image), m.cfg), enc, m.vault, m.cfg);
  const std::size_t n = o.top == 0 ? ranked.size() : std::min(o.top, ranked.size());
  for (std::size_t i = 0; i < n; ++i) {
    std::printf("%zu\t%s\t%s\n", i + 1, ranked[i].first.c_str(), rational(ranked[i].second).c_str());
  }
  return kOk;
}

int cmd_evaluate(const Options& o) {
  ProtocolConfig cfg;
  cfg.arch = architecture(o, o.arch.code_bits);
  cfg.augment = augment_for(o, cfg.arch.input_size);
  cfg.train = o.train;
  cfg.train_per_user = o.train_per_user;
  cfg.validation_per_user = o.validation_per_user;
  cfg.splits = o.splits;
  cfg.seed = o.seed;
  cfg.attack_noise = o.attack_noise;
  Dataset ds;
  if (!o.dataset.empty()) {
    require_exists(o.dataset, "--dataset");
    ds = resized(load_dataset(o.dataset), cfg.augment);
  } else {
    SynthSpec spec = o.synth;
    spec.image_size = cfg.augment.working_size;
    ds = gen_synth_dataset(spec);
  }
  const auto report = run_protocol(ds, cfg, [&](const std::string& msg) { progress(o, msg); });
  std::fputs(format_report(report).c_str(), stdout);
  if (!o.report.empty()) write_report(report, o.report);
  return kOk;
}

int cmd_attack_sim(const Options& o) {
  const auto m = load_matcher(o);
  Dataset unseen;
  if (!o.unseen.empty()) {
    require_exists(o.unseen, "--unseen");
    unseen = resized(load_dataset(o.unseen), m.cfg);
  }
  const NetworkEncoder enc(m.params);
  Rng rng(o.attack_seed);
  const auto result = attack_sim(enc, m.vault, m.cfg, o.noise, unseen, rng);
  std::vector<std::string> ids;
  for (const auto& [id, tpl] : m.vault) ids.push_back(id);

  auto summarize = [&](const char* label, const std::vector<MatchScore>& scores) {
    std::size_t zero = 0;
    for (const auto& s : scores) zero += s.matches == 0 ? 1 : 0;
    const double pct = scores.empty() ? 100.0 : 100.0 * static_cast<double>(zero) / static_cast<double>(scores.size());
    std::printf("%s\tpairs %zu\tzero %zu\t(%.4f%%)\n", label, scores.size(), zero, pct);
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i].matches == 0) continue;
      std::printf("  nonzero probe %zu user %s score %s\n", i / ids.size(), ids[i % ids.size()].c_str(),
                  rational(scores[i]).c_str());
    }
  };
  summarize("noise", result.noise);
  if (!unseen.empty()) summarize("unseen", result.unseen);
  return kOk;
}

int cmd_gradient_check(const Options& o) {
  if (o.cases == 0) throw CliError(kBadConfig, "--cases must be positive");
  double worst = 0.0;
  std::string worst_param;
  std::size_t checked = 0;
  for (std::size_t i = 0; i < o.cases; ++i) {
    const auto c = make_gradient_check_case(o.seed + i);
    const auto r = gradient_check(c.params, c.input, c.target, o.epsilon, c.dropout_seed);
    checked += r.parameters_checked;
    if (r.max_relative_error >= worst) {
      worst = r.max_relative_error;
      worst_param = r.worst_parameter;
    }
  }
  const bool pass = worst < o.tolerance;
  std::printf("max_relative_error %.6e parameters %zu worst %s %s\n", worst, checked, worst_param.c_str(),
              pass ? "pass" : "fail");
  return pass ? kOk : kCheckFailed;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

/// First bare word on the command line, i.e. what the user meant as the
/// subcommand. Options other than the flags consume the following token.
std::string first_word(int argc, char** argv) {
  static const std::vector<std::string> flags{"--help", "-h", "--help-all", "--no-flip", "--keep-codes",
                                              "--overwrite", "--quiet"};
  for (int i = 1; i < argc; ++i) {
    const std::string tok = argv[i];
    if (tok.rfind("-", 0) != 0) return tok;
    if (tok.find('=') == std::string::npos && std::find(flags.begin(), flags.end(), tok) == flags.end()) ++i;
  }
  return {};
}

int fail(int code, const std::string& kind, const std::string& what) {
  std::cerr << "error: " << kind << ": " << one_line(what) << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mebface: face template protection with maximum-entropy binary codes"};
  app.set_config("--config", "", "Flat key=value file; keys are long option names, flags override");
  app.require_subcommand(1);
  app.fallthrough();
  Options o;

  app.add_option("--dataset", o.dataset, "Dataset root (<root>/<user>/<n>.pgm)");
  app.add_option("--codes", o.codes, "Codebook file");
  app.add_option("--params", o.params, "Network parameter file");
  app.add_option("--vault", o.vault, "Vault file");
  app.add_option("--image", o.image, "Probe image (binary PGM)");
  app.add_option("--report", o.report, "Directory for report.txt and scores.csv");
  app.add_option("--unseen", o.unseen, "Dataset of never-enrolled people for attack-sim");
  app.add_option("--out", o.out, "Output directory for synth-data");
  app.add_option("--user", o.user, "Claimed identity for verify");

  app.add_option("--users", o.synth.num_users, "Synthetic users")->capture_default_str();
  app.add_option("--samples", o.synth.samples_per_user, "Synthetic samples per user")->capture_default_str();
  app.add_option("--blobs", o.synth.blobs_per_user, "Blobs per synthetic identity")->capture_default_str();
  app.add_option("--illumination", o.synth.illumination_amplitude, "Illumination gradient amplitude")
      ->capture_default_str();
  app.add_option("--jitter", o.synth.jitter, "Translation jitter in pixels")->capture_default_str();
  app.add_option("--noise-sigma", o.synth.noise_sigma, "Additive Gaussian noise sigma")->capture_default_str();
  app.add_option("--data-seed", o.synth.seed, "Seed for synthetic data")->capture_default_str();

  app.add_option("--bits", o.arch.code_bits, "Code length K (multiple of 8)")->capture_default_str();
  app.add_option("--conv1-maps", o.arch.conv1_maps)->capture_default_str();
  app.add_option("--conv1-filter", o.arch.conv1_filter)->capture_default_str();
  app.add_option("--conv2-maps", o.arch.conv2_maps)->capture_default_str();
  app.add_option("--conv2-filter", o.arch.conv2_filter)->capture_default_str();
  app.add_option("--fc1-units", o.arch.fc1_units)->capture_default_str();
  app.add_option("--fc2-units", o.arch.fc2_units)->capture_default_str();
  app.add_option("--dropout", o.arch.dropout, "Dropout rate in the hidden dense layers")->capture_default_str();
  app.add_option("--working-size", o.augment.working_size, "Image side m")->capture_default_str();
  app.add_option("--crop-size", o.augment.crop_size, "Crop side n")->capture_default_str();
  app.add_flag("--no-flip", o.no_flip, "Disable horizontally flipped crops");

  app.add_option("--epochs", o.train.epochs)->capture_default_str();
  app.add_option("--batch", o.train.batch_size)->capture_default_str();
  app.add_option("--lr", o.train.learning_rate)->capture_default_str();
  app.add_option("--momentum", o.train.momentum)->capture_default_str();
  app.add_option("--weight-decay", o.train.weight_decay)->capture_default_str();

  app.add_option("--code-seed", o.code_seed)->capture_default_str();
  app.add_option("--train-seed", o.train_seed)->capture_default_str();
  app.add_option("--seed", o.seed, "Protocol seed (evaluate) or first case seed (gradient-check)")
      ->capture_default_str();
  app.add_option("--attack-seed", o.attack_seed)->capture_default_str();

  app.add_option("--train-per-user", o.train_per_user)->capture_default_str();
  app.add_option("--validation-per-user", o.validation_per_user)->capture_default_str();
  app.add_option("--splits", o.splits)->capture_default_str();
  app.add_option("--attack-noise", o.attack_noise, "Noise probes in evaluate (split 0)")->capture_default_str();
  app.add_option("--noise", o.noise, "Noise probes in attack-sim")->capture_default_str();

  app.add_option("--threshold", o.threshold, "Accept iff score >= threshold")->capture_default_str();
  app.add_option("--top", o.top, "identify: show this many ranks (0 = all)")->capture_default_str();
  app.add_flag("--keep-codes", o.keep_codes, "enroll: keep the codebook file");
  app.add_flag("--overwrite", o.overwrite, "enroll: replace existing templates");
  app.add_flag("--quiet", o.quiet, "No progress output on stderr");

  app.add_option("--cases", o.cases, "gradient-check: number of random cases")->capture_default_str();
  app.add_option("--epsilon", o.epsilon, "gradient-check: finite-difference step")->capture_default_str();
  app.add_option("--tolerance", o.tolerance, "gradient-check: pass threshold")->capture_default_str();

  using Handler = int (*)(const Options&);
  const std::vector<std::tuple<const char*, const char*, Handler>> commands{
      {"synth-data", "Generate a synthetic identity dataset", cmd_synth_data},
      {"gen-codes", "Draw one random code per dataset user", cmd_gen_codes},
      {"train", "Train the network to map each user's crops to their code", cmd_train},
      {"enroll", "Hash codes into the vault (and delete the codebook)", cmd_enroll},
      {"verify", "Score a probe against one claimed identity", cmd_verify},
      {"identify", "Rank all enrolled identities for a probe", cmd_identify},
      {"evaluate", "Repeated-split GAR@0FAR / EER evaluation", cmd_evaluate},
      {"attack-sim", "Score uniform-noise probes against every template", cmd_attack_sim},
      {"gradient-check", "Finite-difference check of backpropagation", cmd_gradient_check},
  };
  std::vector<std::pair<CLI::App*, Handler>> subs;
  for (const auto& [name, help, handler] : commands) subs.emplace_back(app.add_subcommand(name, help), handler);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::FileError& e) {
    return fail(kMissingFile, "missing file", e.what());
  } catch (const CLI::ConversionError& e) {
    return fail(kBadConfig, "bad config", e.what());
  } catch (const CLI::ValidationError& e) {
    return fail(kBadConfig, "bad config", e.what());
  } catch (const CLI::ConfigError& e) {
    return fail(kBadConfig, "bad config", e.what());
  } catch (const CLI::ParseError& e) {
    const auto word = first_word(argc, argv);
    if (!word.empty() && !app.get_subcommand_no_throw(word)) return fail(kUsage, "unknown subcommand", word);
    return fail(kUsage, "usage", e.what());
  }

  try {
    for (const auto& [sub, handler] : subs) {
      if (sub->parsed()) return handler(o);
    }
    return fail(kUsage, "usage", "no subcommand");
  } catch (const CliError& e) {
    return fail(e.code(), e.code() == kBadConfig ? "bad config" : "failure", e.what());
  } catch (const UnknownUserError& e) {
    return fail(kUnknownUser, "unknown user", e.user_id());
  } catch (const DuplicateUserError& e) {
    return fail(kDuplicateUser, "duplicate user", e.what());
  } catch (const FileError& e) {
    return fail(kMissingFile, "missing file", e.what());
  } catch (const ChecksumError& e) {
    return fail(kBadFormat, "checksum", e.what());
  } catch (const FormatError& e) {
    return fail(kBadFormat, "bad format", e.what());
  } catch (const std::invalid_argument& e) {
    return fail(kBadConfig, "bad config", e.what());
  } catch (const std::exception& e) {
    return fail(kFailure, "failure", e.what());
  }
}
