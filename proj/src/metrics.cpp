#include "mebface/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace mebface {
namespace {

void require_scores(std::span<const double> genuine, std::span<const double> imposter) {
  if (genuine.empty() || imposter.empty()) {
    throw std::invalid_argument("metrics: genuine and imposter score lists must be non-empty");
  }
}

}  // namespace

double gar_at_zero_far(std::span<const double> genuine, std::span<const double> imposter) {
  require_scores(genuine, imposter);
  const double max_imposter = *std::max_element(imposter.begin(), imposter.end());
  const auto accepted = std::count_if(genuine.begin(), genuine.end(),
                                      [&](double g) { return g > max_imposter; });
  return 100.0 * static_cast<double>(accepted) / static_cast<double>(genuine.size());
}

EerPoint equal_error_point(std::span<const double> genuine, std::span<const double> imposter) {
  require_scores(genuine, imposter);
  std::vector<double> gen(genuine.begin(), genuine.end());
  std::vector<double> imp(imposter.begin(), imposter.end());
  std::sort(gen.begin(), gen.end());
  std::sort(imp.begin(), imp.end());

  std::vector<double> candidates(gen);
  candidates.insert(candidates.end(), imp.begin(), imp.end());
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  // a threshold above every score: FAR = 0, FRR = 1
  candidates.push_back(candidates.back() + 1.0);

  const auto ng = static_cast<std::int64_t>(gen.size());
  const auto ni = static_cast<std::int64_t>(imp.size());
  EerPoint best;
  std::int64_t best_gap = std::numeric_limits<std::int64_t>::max();
  std::size_t g_below = 0;  // genuine scores < threshold
  std::size_t i_below = 0;  // imposter scores < threshold
  for (double t : candidates) {
    while (g_below < gen.size() && gen[g_below] < t) ++g_below;
    while (i_below < imp.size() && imp[i_below] < t) ++i_below;
    const auto false_accepts = ni - static_cast<std::int64_t>(i_below);
    const auto false_rejects = static_cast<std::int64_t>(g_below);
    // |FAR - FRR| compared exactly as |fa * ng - fr * ni|
    const std::int64_t gap = std::llabs(false_accepts * ng - false_rejects * ni);
    if (gap < best_gap) {
      best_gap = gap;
      best.threshold = t;
      best.far = 100.0 * static_cast<double>(false_accepts) / static_cast<double>(ni);
      best.frr = 100.0 * static_cast<double>(false_rejects) / static_cast<double>(ng);
      best.eer = 50.0 * (static_cast<double>(false_accepts) / static_cast<double>(ni) +
                         static_cast<double>(false_rejects) / static_cast<double>(ng));
    }
  }
  return best;
}

double compute_eer(std::span<const double> genuine, std::span<const double> imposter) {
  return equal_error_point(genuine, imposter).eer;
}

std::vector<std::size_t> lattice_histogram(std::span<const double> scores, std::size_t crops) {
  if (crops == 0) throw std::invalid_argument("histogram: crop count must be positive");
  std::vector<std::size_t> bins(crops + 1, 0);
  for (double s : scores) {
    const auto k = static_cast<long>(std::lround(std::clamp(s, 0.0, 1.0) * static_cast<double>(crops)));
    ++bins[static_cast<std::size_t>(k)];
  }
  return bins;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd r;
  if (values.empty()) return r;
  double sum = 0.0;
  for (double v : values) sum += v;
  r.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - r.mean) * (v - r.mean);
    r.stddev = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return r;
}

}  // namespace mebface
