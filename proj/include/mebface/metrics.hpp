#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mebface {

/// Percentage of genuine scores accepted at the lowest threshold that
/// rejects every imposter, i.e. the fraction of genuine scores strictly
/// above max(imposter). On a lattice of step 1/|H| that threshold is
/// max(imposter) + 1/(2|H|).
double gar_at_zero_far(std::span<const double> genuine, std::span<const double> imposter);

/// Operating point where FAR and FRR are closest (accept iff score >= threshold).
struct EerPoint {
  double eer = 0.0;        // percent, (FAR + FRR) / 2
  double threshold = 0.0;  // lowest threshold attaining the minimum |FAR - FRR|
  double far = 0.0;        // percent
  double frr = 0.0;        // percent
};

EerPoint equal_error_point(std::span<const double> genuine, std::span<const double> imposter);
double compute_eer(std::span<const double> genuine, std::span<const double> imposter);

/// Counts per lattice bin k/|H|, k = 0..|H|; bin = round(score * |H|).
std::vector<std::size_t> lattice_histogram(std::span<const double> scores, std::size_t crops);

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for a single value
};
MeanStd mean_std(std::span<const double> values);

}  // namespace mebface
