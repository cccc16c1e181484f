#include <algorithm>
#include <sstream>

#include "avr/analysis/analysis.hpp"
#include "avr/core/errors.hpp"
#include "avr/core/io.hpp"

namespace avr::analysis {

std::string arm_label(const std::string& content_id, const std::string& model, const Features& f, bool final_stage) {
  return content_id + "|" + model + "|a" + std::to_string(f.assets) + "f" + std::to_string(f.feedback) + "b" +
         std::to_string(f.init_best) + "|" + (final_stage ? "final" : "initial");
}

std::optional<ParsedArm> parse_arm_label(std::string_view label) {
  std::vector<std::string> parts;
  std::stringstream in{std::string(label)};
  std::string part;
  while (std::getline(in, part, '|')) parts.push_back(part);
  if (parts.size() != 4 || parts[0].empty() || parts[1].empty()) return std::nullopt;
  const auto& f = parts[2];
  if (f.size() != 6 || f[0] != 'a' || f[2] != 'f' || f[4] != 'b') return std::nullopt;
  auto bit = [](char c) -> std::optional<int> {
    if (c == '0' || c == '1') return c - '0';
    return std::nullopt;
  };
  const auto a = bit(f[1]), fb = bit(f[3]), b = bit(f[5]);
  if (!a || !fb || !b) return std::nullopt;
  if (parts[3] != "final" && parts[3] != "initial") return std::nullopt;
  return ParsedArm{parts[0], parts[1], {*a, *fb, *b}, parts[3] == "final"};
}

std::vector<TrialRow> rows_from_outcomes(const std::vector<ComparisonOutcome>& outcomes,
                                         const std::map<std::string, ContentKind>& kinds, bool include_flagged) {
  std::vector<TrialRow> rows;
  for (const auto& o : outcomes) {
    if (o.flagged && !include_flagged) continue;
    const auto a = parse_arm_label(o.side_a);
    const auto b = parse_arm_label(o.side_b);
    auto emit = [&](const std::optional<ParsedArm>& arm, const std::string& opponent, bool won) {
      if (!arm || !arm->final_stage) return;
      const auto kind = kinds.find(arm->content_id);
      if (kind == kinds.end()) throw ValidationError("no content kind known for '" + arm->content_id + "'");
      rows.push_back({arm->content_id, kind->second, arm->model, arm->features, opponent, won ? 1 : 0});
    };
    emit(a, o.side_b, o.verdict == 'A');
    emit(b, o.side_a, o.verdict == 'B');
  }
  return rows;
}

std::vector<ComparisonOutcome> load_outcomes(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ValidationError(dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json" && e.path().parent_path().filename() == "comparisons")
      files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<ComparisonOutcome> out;
  for (const auto& f : files) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(io::read_file(f));
      const auto v = j.at("verdict").get<std::string>();
      if (v != "A" && v != "B") throw ValidationError("bad verdict");
      out.push_back({j.at("side_a").get<std::string>(), j.at("side_b").get<std::string>(), v[0],
                     j.value("parse_status", std::string()) == "fallback"});
    } catch (const std::exception& e) {
      throw ValidationError(f.string() + ": not a comparison record (" + e.what() + ")");
    }
  }
  return out;
}

std::string rows_to_jsonl(const std::vector<TrialRow>& rows) {
  std::string out;
  for (const auto& r : rows)
    out += nlohmann::json{{"content_id", r.content_id},
                          {"kind", to_string(r.kind)},
                          {"model", r.model},
                          {"assets", r.features.assets},
                          {"feedback", r.features.feedback},
                          {"init_best", r.features.init_best},
                          {"opponent", r.opponent},
                          {"win", r.win}}
               .dump() +
           "\n";
  return out;
}

std::vector<TrialRow> rows_from_jsonl(std::string_view text) {
  std::vector<TrialRow> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      TrialRow r;
      r.content_id = j.at("content_id").get<std::string>();
      r.kind = parse_content_kind(j.at("kind").get<std::string>());
      r.model = j.at("model").get<std::string>();
      r.features = {j.at("assets").get<int>(), j.at("feedback").get<int>(), j.at("init_best").get<int>()};
      r.opponent = j.value("opponent", std::string());
      r.win = j.at("win").get<int>();
      if (r.win != 0 && r.win != 1) throw ValidationError("win must be 0 or 1");
      rows.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw ValidationError("rows line " + std::to_string(n) + ": " + e.what());
    }
  }
  return rows;
}

}  // namespace avr::analysis
