#include "mebface/report.hpp"

#include <cstdio>
#include <fstream>

#include "mebface/errors.hpp"

namespace mebface {
namespace {

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

void append_histogram(std::string& out, const char* name, const std::vector<std::size_t>& bins,
                      std::size_t crops) {
  std::size_t total = 0;
  for (auto b : bins) total += b;
  out += std::string("histogram ") + name + " (n=" + std::to_string(total) + ")\n";
  for (std::size_t k = 0; k < bins.size(); ++k) {
    if (bins[k] == 0) continue;
    out += "  " + std::to_string(k) + "/" + std::to_string(crops) + "\t" + std::to_string(bins[k]) + "\n";
  }
}

void append_scores(std::string& out, const char* label, const std::vector<MatchScore>& scores) {
  for (const auto& s : scores) {
    out += std::string(label) + "," + std::to_string(s.matches) + "/" + std::to_string(s.total) + "," +
           fixed(s.value(), 8) + "\n";
  }
}

}  // namespace

std::string format_report(const EvalReport& report) {
  std::string out = "MEB evaluation report\n";
  out += "crops_per_sample\t" + std::to_string(report.crops_per_sample) + "\n";
  out += "splits\t" + std::to_string(report.splits.size()) + "\n";
  for (std::size_t i = 0; i < report.splits.size(); ++i) {
    const auto& s = report.splits[i];
    out += "split " + std::to_string(i) + "\tGAR@0FAR " + fixed(s.gar_at_zero_far) + "%\tEER " +
           fixed(s.eer) + "%";
    if (!s.epoch_loss.empty()) out += "\tfinal_loss " + fixed(s.epoch_loss.back(), 6);
    out += "\n";
  }
  out += "GAR@0FAR mean " + fixed(report.gar_mean) + "% std " + fixed(report.gar_std) + "%\n";
  out += "EER mean " + fixed(report.eer_mean) + "% std " + fixed(report.eer_std) + "%\n";
  append_histogram(out, "genuine", report.genuine_histogram(), report.crops_per_sample);
  append_histogram(out, "imposter", report.imposter_histogram(), report.crops_per_sample);
  if (!report.attack.empty()) {
    append_histogram(out, "attack", report.attack_histogram(), report.crops_per_sample);
  }
  return out;
}

std::string format_scores_csv(const EvalReport& report) {
  std::string out = "label,fraction,score\n";
  append_scores(out, "genuine", report.genuine);
  append_scores(out, "imposter", report.imposter);
  append_scores(out, "attack", report.attack);
  return out;
}

void write_report(const EvalReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, text] : {std::pair{"report.txt", format_report(report)},
                                   std::pair{"scores.csv", format_scores_csv(report)}}) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw FileError("cannot write " + (dir / name).string());
    out << text;
  }
}

}  // namespace mebface
