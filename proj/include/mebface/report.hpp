#pragma once

#include <filesystem>
#include <string>

#include "mebface/protocol.hpp"

namespace mebface {

/// Plain-text summary: per-split metrics, mean/std, and the three lattice
/// histograms (bin width 1/|H|). Output depends only on the report contents.
std::string format_report(const EvalReport& report);

/// `label,score` rows with label in {genuine, imposter, attack}; scores
/// written as exact `matches/total` fractions and as decimals.
std::string format_scores_csv(const EvalReport& report);

/// Writes report.txt and scores.csv into `dir` (created if missing).
void write_report(const EvalReport& report, const std::filesystem::path& dir);

}  // namespace mebface
