#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "avr/core/run_handle.hpp"
#include "avr/core/types.hpp"
#include "avr/gateway/client.hpp"
#include "avr/recorder/recorder.hpp"

namespace avr::evaluator {

struct EvalMode {
  bool multiround = true;
  bool relative = true;
  bool review = true;

  /// multiround requires relative.
  void validate() const;
  /// Three characters of 1/0 in multiround, relative, review order, e.g. "111".
  std::string token() const;
  bool operator==(const EvalMode&) const = default;
};

/// Accepts "full", "111", "011", "001", "010", "000" (and "110").
EvalMode parse_mode(std::string_view token);

enum class ParseStatus { clean, coerced, fallback };
std::string_view to_string(ParseStatus status);
ParseStatus parse_status_from(std::string_view token);

struct Verdict {
  /// 'A' or 'B' (presentation slot).
  char side = 'B';
  ParseStatus status = ParseStatus::fallback;
};

/// Last `FINAL: A|B` line (clean); else the last standalone A or B in the
/// final sentence (coerced); else the second-presented slot B (fallback).
Verdict parse_verdict(std::string_view text);

/// One content as presented to the judges.
struct Side {
  std::string content_id;
  recorder::AVRecording recording;
  int console_errors = 0;
};

struct Round {
  std::string prompt;
  std::string reply;
  /// Transcript path relative to the sink root.
  std::string transcript;
};

struct ComparisonRecord {
  std::string cmp_id;
  std::string spec_id;
  std::string side_a;
  std::string side_b;
  EvalMode mode;
  std::vector<Round> omni_transcript;
  std::optional<Round> review_transcript;
  char verdict = 'B';
  ParseStatus parse_status = ParseStatus::fallback;

  /// Content id of the winner.
  const std::string& winner() const { return verdict == 'A' ? side_a : side_b; }
  /// Fallback verdicts are left out of analyses by default.
  bool flagged() const { return parse_status == ParseStatus::fallback; }
};

nlohmann::json to_json(const ComparisonRecord& record);
ComparisonRecord comparison_from(const nlohmann::json& j);

struct Judges {
  gateway::ModelClient* omni = nullptr;
  /// Required when mode.review is set.
  gateway::ModelClient* reviewer = nullptr;
  double temperature = 0.0;
  std::int64_t seed = 0;
  gateway::Clock* clock = nullptr;
};

/// Prompt texts, exposed for tests.
namespace prompts {
std::string criteria_block(const ContentSpec& spec);
std::string describe(const ContentSpec& spec, char label);
std::string decide(const ContentSpec& spec);
std::string single(const ContentSpec& spec);
std::string independent(const ContentSpec& spec, char label);
std::string review(const ContentSpec& spec, const std::vector<Round>& omni, bool relative);
std::string final_pick(const ContentSpec& spec, const std::string& eval_a, const std::string& eval_b);
}  // namespace prompts

/// Judges `a` (slot A) against `b` (slot B). Writes one transcript per model
/// call and `comparisons/<cmp_id>.json` through `sink`.
ComparisonRecord compare(const Side& a, const Side& b, const ContentSpec& spec, const EvalMode& mode,
                         const Judges& judges, ArtifactSink& sink, const std::string& cmp_id);

struct DuelResult {
  int a_wins = 0;
  int b_wins = 0;
  std::vector<std::string> cmp_ids;
};

/// Both orderings; wins are tallied by content. A side that is absent
/// (failed recording) loses every comparison without a model call; two
/// absent sides give 0-0.
DuelResult duel(const std::optional<Side>& a, const std::optional<Side>& b, const ContentSpec& spec,
                const EvalMode& mode, const Judges& judges, ArtifactSink& sink, const std::string& duel_id);

struct TournamentResult {
  std::size_t winner = 0;
  /// wins[i][j]: comparisons candidate i won against candidate j.
  std::vector<std::vector<int>> wins;
  std::vector<int> totals;
  std::vector<std::string> trace;
};

nlohmann::json to_json(const TournamentResult& result);

/// Winner from a complete duel matrix: most wins, then head-to-head wins
/// among the tied, then lowest index.
TournamentResult decide_winner(std::vector<std::vector<int>> wins);

using DuelFn = std::function<DuelResult(std::size_t i, std::size_t j)>;

/// Runs every unordered pair i<j through `duel` (on up to `workers` threads)
/// and decides the winner.
TournamentResult round_robin(std::size_t k, const DuelFn& duel, std::size_t workers = 1);

}  // namespace avr::evaluator
