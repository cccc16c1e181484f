#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "avr/core/types.hpp"

namespace avr::analysis {

namespace fs = std::filesystem;

// ------------------------------------------------------------------ plan

enum class Dataset { a, b, c };
Dataset parse_dataset(std::string_view token);
std::string_view to_string(Dataset dataset);

/// Setting index bits: 1 = with assets, 2 = with feedback, 4 = best-of-k initial.
struct Features {
  int assets = 0;
  int feedback = 0;
  int init_best = 0;

  static Features from_setting(int setting);
  int setting() const { return assets | (feedback << 1) | (init_best << 2); }
  bool operator==(const Features&) const = default;
};

struct Arm {
  int model = 0;
  int setting = 0;
  /// false: the initial (pre-improvement) content of that model and setting.
  bool final_stage = true;
  bool operator==(const Arm&) const = default;
};

/// One comparison seen from its focal arm. Every judged comparison appears
/// once per study arm taking part in it.
struct PlanTask {
  int content = 0;
  Arm focal;
  Arm opponent;
  /// Focal arm shown in slot A.
  bool focal_first = true;
};

struct PlanSize {
  int n_contents = 10;
  int n_models = 9;
  int n_settings = 8;
};

std::vector<PlanTask> enumerate_plan(Dataset dataset, const PlanSize& size = {});
/// "10*9*8*(8-1)*2=10080" style product for the dataset.
std::string plan_breakdown(Dataset dataset, const PlanSize& size = {});

// ------------------------------------------------------------------ rows

struct TrialRow {
  std::string content_id;
  ContentKind kind = ContentKind::game;
  std::string model;
  Features features;
  std::string opponent;
  int win = 0;
};

/// Side id naming a study arm: `<content>|<model>|a<0|1>f<0|1>b<0|1>|<final|initial>`.
std::string arm_label(const std::string& content_id, const std::string& model, const Features& f, bool final_stage);

struct ParsedArm {
  std::string content_id;
  std::string model;
  Features features;
  bool final_stage = true;
};
std::optional<ParsedArm> parse_arm_label(std::string_view label);

struct ComparisonOutcome {
  std::string side_a;
  std::string side_b;
  /// 'A' or 'B'.
  char verdict = 'B';
  bool flagged = false;
};

/// One row per final-stage arm side of each comparison. Flagged outcomes are
/// skipped unless `include_flagged`.
std::vector<TrialRow> rows_from_outcomes(const std::vector<ComparisonOutcome>& outcomes,
                                         const std::map<std::string, ContentKind>& kinds, bool include_flagged = false);

/// Every `*.json` comparison record below `dir`.
std::vector<ComparisonOutcome> load_outcomes(const fs::path& dir);

std::string rows_to_jsonl(const std::vector<TrialRow>& rows);
std::vector<TrialRow> rows_from_jsonl(std::string_view text);

// ------------------------------------------------------------------ win rates

/// Keys: assets, feedback, init_best, model, kind.
using GroupKeys = std::vector<std::string>;

struct WinrateCell {
  /// "key=value" pairs joined by ", ".
  std::string group;
  double mean_pct = 0.0;
  double sd_pct = 0.0;
  int n_contents = 0;
  /// Set when n_contents == 1 and sd is reported as 0.
  bool sd_undefined = false;
};

/// Per content win% = 100 * wins / rows; cell = mean and sample sd over
/// contents. Every group must cover every content present in `rows`.
std::vector<WinrateCell> winrate_table(const std::vector<TrialRow>& rows, const GroupKeys& group_by);

// ------------------------------------------------------------------ regression

struct Design {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<std::string> labels;
  /// Column rank of X is below its width.
  bool rank_deficient = false;
  /// Columns with no variation besides the intercept.
  std::vector<std::string> constant_columns;
};

Design build_design(const std::vector<TrialRow>& rows, const std::string& baseline_model,
                    ContentKind baseline_kind = ContentKind::game);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct LogitFit {
  Eigen::VectorXd beta;
  Eigen::VectorXd se;
  /// beta +/- 1.959964 se. Empty when separable.
  std::vector<Interval> ci95;
  /// Inverse-logit of the ci95 endpoints.
  std::vector<Interval> ci95_prob;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  bool separable = false;
  std::vector<std::string> labels;
};

inline constexpr double kZ95 = 1.959964;

double sigmoid(double x);
double log_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& beta);
Eigen::VectorXd score(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& beta);

/// Newton/IRLS maximization of the Bernoulli log-likelihood. Stops when
/// max |score| < tol. Throws ValidationError on a singular information matrix.
LogitFit fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double tol = 1e-10, int max_iter = 100);
LogitFit fit_logistic(const Design& design, double tol = 1e-10, int max_iter = 100);

// ------------------------------------------------------------------ reports

std::string render_winrates(const std::vector<WinrateCell>& cells);
std::string render_fit(const LogitFit& fit);
nlohmann::json to_json(const LogitFit& fit);

}  // namespace avr::analysis
