#include <cmath>
#include <set>

#include "avr/analysis/analysis.hpp"
#include "avr/core/errors.hpp"

namespace avr::analysis {

namespace {

std::string key_value(const TrialRow& r, const std::string& key) {
  if (key == "assets") return std::to_string(r.features.assets);
  if (key == "feedback") return std::to_string(r.features.feedback);
  if (key == "init_best") return std::to_string(r.features.init_best);
  if (key == "model") return r.model;
  if (key == "kind") return std::string(to_string(r.kind));
  throw ValidationError("unknown group key '" + key + "' (assets, feedback, init_best, model, kind)");
}

}  // namespace

std::vector<WinrateCell> winrate_table(const std::vector<TrialRow>& rows, const GroupKeys& group_by) {
  std::set<std::string> contents;
  // group -> content -> (wins, rows)
  std::map<std::string, std::map<std::string, std::pair<long, long>>> tally;
  for (const auto& r : rows) {
    std::string group;
    for (const auto& k : group_by) group += (group.empty() ? "" : ", ") + k + "=" + key_value(r, k);
    if (group.empty()) group = "all";
    auto& t = tally[group][r.content_id];
    t.first += r.win;
    t.second += 1;
    contents.insert(r.content_id);
  }
  std::vector<WinrateCell> out;
  for (const auto& [group, per_content] : tally) {
    std::string missing;
    for (const auto& c : contents)
      if (!per_content.contains(c)) missing += (missing.empty() ? "" : ", ") + c;
    if (!missing.empty()) throw ValidationError("group '" + group + "' has no rows for: " + missing);
    std::vector<double> pct;
    for (const auto& [c, t] : per_content) pct.push_back(100.0 * static_cast<double>(t.first) / static_cast<double>(t.second));
    double mean = 0.0;
    for (double p : pct) mean += p;
    mean /= static_cast<double>(pct.size());
    WinrateCell cell{group, mean, 0.0, static_cast<int>(pct.size()), pct.size() < 2};
    if (pct.size() > 1) {
      double ss = 0.0;
      for (double p : pct) ss += (p - mean) * (p - mean);
      cell.sd_pct = std::sqrt(ss / static_cast<double>(pct.size() - 1));
    }
    out.push_back(cell);
  }
  return out;
}

}  // namespace avr::analysis
