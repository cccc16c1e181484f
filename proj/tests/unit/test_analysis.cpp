#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "avr/analysis/analysis.hpp"
#include "avr/core/errors.hpp"
#include "avr/core/io.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace avr;
using namespace avr::analysis;

namespace {

Eigen::MatrixXd to_eigen(const oracle::Matrix& X) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(X.size()), static_cast<Eigen::Index>(X[0].size()));
  for (std::size_t i = 0; i < X.size(); ++i)
    for (std::size_t j = 0; j < X[0].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = X[i][j];
  return m;
}

Eigen::VectorXd to_eigen(const std::vector<double>& y) {
  return Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
}

TrialRow row(std::string content, std::string model, int setting, int win, ContentKind kind = ContentKind::game) {
  return {std::move(content), kind, std::move(model), Features::from_setting(setting), "opp", win};
}

}  // namespace

TEST_CASE("plan sizes") {
  CHECK(enumerate_plan(Dataset::a).size() == 10080);
  CHECK(enumerate_plan(Dataset::b).size() == 1440);
  CHECK(enumerate_plan(Dataset::c).size() == 11520);
  CHECK(plan_breakdown(Dataset::a) == "10*9*8*(8-1)*2=10080");
  CHECK(plan_breakdown(Dataset::b) == "10*9*8*2=1440");
  CHECK(plan_breakdown(Dataset::c) == "10*8*9*(9-1)*2=11520");
  CHECK(enumerate_plan(Dataset::a, {3, 2, 4}).size() == 3 * 2 * 4 * 3 * 2);
}

TEST_CASE("plan tasks are distinct and well formed") {
  for (auto ds : {Dataset::a, Dataset::b, Dataset::c}) {
    std::set<std::tuple<int, int, int, bool, int, int, bool, bool>> seen;
    for (const auto& t : enumerate_plan(ds)) {
      CHECK_FALSE(t.focal == t.opponent);
      CHECK(t.focal.final_stage);
      seen.insert({t.content, t.focal.model, t.focal.setting, t.focal.final_stage, t.opponent.model,
                   t.opponent.setting, t.opponent.final_stage, t.focal_first});
      if (ds == Dataset::a) CHECK(t.focal.model == t.opponent.model);
      if (ds == Dataset::b) {
        CHECK(t.focal.model == t.opponent.model);
        CHECK(t.focal.setting == t.opponent.setting);
        CHECK_FALSE(t.opponent.final_stage);
      }
      if (ds == Dataset::c) CHECK(t.focal.setting == t.opponent.setting);
    }
    CHECK(seen.size() == enumerate_plan(ds).size());
  }
}

TEST_CASE("dataset a has fourteen rows per content and setting") {
  std::map<std::tuple<int, int, int>, int> per;
  for (const auto& t : enumerate_plan(Dataset::a)) ++per[{t.content, t.focal.model, t.focal.setting}];
  for (const auto& [k, n] : per) CHECK(n == 14);
}

TEST_CASE("arm labels round-trip") {
  for (int s = 0; s < 8; ++s)
    for (bool fin : {true, false}) {
      const auto label = arm_label("pong", "m-1", Features::from_setting(s), fin);
      const auto back = parse_arm_label(label);
      REQUIRE(back);
      CHECK(back->content_id == "pong");
      CHECK(back->model == "m-1");
      CHECK(back->features.setting() == s);
      CHECK(back->final_stage == fin);
    }
  CHECK(arm_label("pong", "m", Features::from_setting(5), true) == "pong|m|a1f0b1|final");
  CHECK_FALSE(parse_arm_label("v003").has_value());
}

TEST_CASE("rows come from final-stage sides only and skip flagged outcomes") {
  const std::map<std::string, ContentKind> kinds{{"pong", ContentKind::game}};
  const auto f0 = arm_label("pong", "m", Features::from_setting(0), true);
  const auto f3 = arm_label("pong", "m", Features::from_setting(3), true);
  const auto i3 = arm_label("pong", "m", Features::from_setting(3), false);
  const std::vector<ComparisonOutcome> outs{{f0, f3, 'A', false}, {f3, i3, 'B', false}, {f0, f3, 'B', true}};
  const auto rows = rows_from_outcomes(outs, kinds);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].features.setting() == 0);
  CHECK(rows[0].win == 1);
  CHECK(rows[1].features.setting() == 3);
  CHECK(rows[1].win == 0);
  CHECK(rows[2].opponent == i3);
  CHECK(rows[2].win == 0);
  CHECK(rows_from_outcomes(outs, kinds, true).size() == 5);
  CHECK(rows_from_jsonl(rows_to_jsonl(rows)).size() == 3);
  CHECK(rows_from_jsonl(rows_to_jsonl(rows))[0].opponent == f3);
  CHECK_THROWS_AS(rows_from_outcomes(outs, {}), ValidationError);
}

TEST_CASE("outcomes are read from comparisons directories") {
  test::TempDir dir("out");
  io::write_file_atomic(dir / "x/comparisons/c1.json",
                        R"({"side_a":"a","side_b":"b","verdict":"A","parse_status":"clean"})");
  io::write_file_atomic(dir / "x/comparisons/c2.json",
                        R"({"side_a":"a","side_b":"b","verdict":"B","parse_status":"fallback"})");
  io::write_file_atomic(dir / "x/transcripts/t.json", R"({"unrelated":true})");
  const auto outs = load_outcomes(dir.path());
  REQUIRE(outs.size() == 2);
  CHECK(outs[0].verdict == 'A');
  CHECK(outs[1].flagged);
  io::write_file_atomic(dir / "x/comparisons/bad.json", R"({"verdict":"C"})");
  CHECK_THROWS_AS(load_outcomes(dir.path()), ValidationError);
}

TEST_CASE("win rate basics") {
  std::vector<TrialRow> rows;
  for (int i = 0; i < 14; ++i) rows.push_back(row("c0", "m", 0, i < 7));
  auto cells = winrate_table(rows, {"assets"});
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].mean_pct == doctest::Approx(50.0));
  CHECK(cells[0].sd_pct == 0.0);
  CHECK(cells[0].sd_undefined);

  rows.clear();
  for (int c = 0; c < 10; ++c)
    for (int i = 0; i < 14; ++i) rows.push_back(row("c" + std::to_string(c), "m", 0, 1));
  cells = winrate_table(rows, {});
  CHECK(cells[0].mean_pct == doctest::Approx(100.0));
  CHECK(cells[0].sd_pct == doctest::Approx(0.0));
  CHECK_FALSE(cells[0].sd_undefined);
}

TEST_CASE("win rates match an independent recomputation and ignore row order") {
  auto g = test::rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<TrialRow> rows;
    std::vector<std::tuple<std::string, std::string, int>> rec;
    for (int c = 0; c < 10; ++c)
      for (int s = 0; s < 8; ++s)
        for (int i = 0; i < 14; ++i) {
          const int win = test::uniform(g, 0, 99) < 20 + 8 * s + c ? 1 : 0;
          rows.push_back(row("c" + std::to_string(c), "m", s, win, c % 2 ? ContentKind::animation : ContentKind::game));
          const auto f = Features::from_setting(s);
          rec.emplace_back("assets=" + std::to_string(f.assets) + ", feedback=" + std::to_string(f.feedback),
                           "c" + std::to_string(c), win);
        }
    const auto want = oracle::winrates(rec);
    const auto cells = winrate_table(rows, {"assets", "feedback"});
    REQUIRE(cells.size() == want.size());
    for (const auto& cell : cells) {
      const auto& w = want.at(cell.group);
      CHECK(std::abs(cell.mean_pct - w.mean) < 0.05);
      CHECK(std::abs(cell.sd_pct - w.sd) < 0.05);
      CHECK(cell.n_contents == 10);
    }
    std::shuffle(rows.begin(), rows.end(), g);
    const auto shuffled = winrate_table(rows, {"assets", "feedback"});
    for (std::size_t i = 0; i < cells.size(); ++i) {
      CHECK(shuffled[i].group == cells[i].group);
      CHECK(shuffled[i].mean_pct == doctest::Approx(cells[i].mean_pct).epsilon(1e-12));
      CHECK(shuffled[i].sd_pct == doctest::Approx(cells[i].sd_pct).epsilon(1e-12));
    }
  }
}

TEST_CASE("a group missing a content is a gap error naming it") {
  std::vector<TrialRow> rows{row("c0", "m", 0, 1), row("c1", "m", 0, 0), row("c0", "m", 1, 1)};
  try {
    winrate_table(rows, {"assets"});
    FAIL("expected a gap error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("c1") != std::string::npos);
  }
  CHECK_THROWS_AS(winrate_table(rows, {"colour"}), ValidationError);
}

TEST_CASE("design columns") {
  std::vector<TrialRow> rows;
  for (int m = 0; m < 9; ++m)
    for (int s = 0; s < 8; ++s)
      for (auto kind : {ContentKind::game, ContentKind::animation})
        rows.push_back(row(kind == ContentKind::game ? "g" : "a", "model" + std::to_string(m), s, (m + s) % 2, kind));
  const auto d = build_design(rows, "model0");
  CHECK(d.X.cols() == 13);
  CHECK(d.labels[4] == "animation");
  CHECK(d.labels[5] == "model:model1");
  CHECK((d.X.col(0).array() == 1.0).all());
  CHECK_FALSE(d.rank_deficient);
  CHECK(d.constant_columns.empty());

  std::vector<TrialRow> base;
  for (int s = 0; s < 8; ++s) base.push_back(row("g", "model0", s, s % 2));
  const auto b = build_design(base, "model0");
  CHECK(b.X.cols() == 5);
  CHECK(b.constant_columns == std::vector<std::string>{"animation"});
  CHECK(b.rank_deficient);
  CHECK_THROWS_AS(fit_logistic(b), ValidationError);
  CHECK_THROWS_AS(build_design(base, "nobody"), ValidationError);
}

TEST_CASE("bias-only fit on 932 wins of 1440") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(1440, 1);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(1440);
  y.head(932).setOnes();
  const auto fit = fit_logistic(X, y);
  CHECK(fit.converged);
  CHECK(sigmoid(fit.beta(0)) == doctest::Approx(0.647222).epsilon(1e-6));
  CHECK(std::abs(fit.ci95_prob[0].lo - 0.6222) < 0.0005);
  CHECK(std::abs(fit.ci95_prob[0].hi - 0.6715) < 0.0005);
  CHECK(std::abs(fit.ci95_prob[0].lo - 0.622) < 0.001);
  CHECK(std::abs(fit.ci95_prob[0].hi - 0.672) < 0.001);
}

TEST_CASE("intercept-only closed form") {
  auto g = test::rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = test::uniform(g, 20, 400);
    const int k = test::uniform(g, 1, n - 1);
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(n, 1);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
    y.head(k).setOnes();
    const auto fit = fit_logistic(X, y);
    const double p = static_cast<double>(k) / n;
    // The fit stops at |score| < 1e-10, so beta is within that over the information.
    CHECK(std::abs(fit.beta(0) - std::log(p / (1 - p))) <= 1e-10 / (n * p * (1 - p)));
    CHECK(fit.se(0) == doctest::Approx(1.0 / std::sqrt(n * p * (1 - p))).epsilon(1e-10));
    CHECK(fit.ci95[0].lo == doctest::Approx(fit.beta(0) - kZ95 * fit.se(0)).epsilon(1e-12));
  }
}

TEST_CASE("balanced symmetric design gives zero coefficients") {
  Eigen::MatrixXd X(16, 3);
  Eigen::VectorXd y(16);
  int r = 0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int rep = 0; rep < 2; ++rep)
        for (int win = 0; win < 2; ++win) {
          X.row(r) << 1, a, b;
          y(r++) = win;
        }
  const auto fit = fit_logistic(X, y);
  CHECK(fit.beta.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("all wins is separable and suppresses intervals") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(50, 1);
  Eigen::VectorXd y = Eigen::VectorXd::Ones(50);
  const auto fit = fit_logistic(X, y);
  CHECK(fit.separable);
  CHECK(fit.ci95.empty());
  CHECK(fit.ci95_prob.empty());
  CHECK(render_fit(fit).find("separ") != std::string::npos);
}

TEST_CASE("IRLS matches gradient ascent, zeroes the score and agrees with finite differences") {
  auto g = test::rng(13);
  int checked = 0;
  while (checked < 20) {
    const auto p = static_cast<std::size_t>(test::uniform(g, 1, 5));
    const auto n = static_cast<std::size_t>(test::uniform(g, 60, 200));
    const auto data = oracle::random_logit_data(g, n, p);
    const auto fit = fit_logistic(to_eigen(data.X), to_eigen(data.y));
    if (fit.separable) continue;
    ++checked;
    const auto want = oracle::gradient_ascent(data.X, data.y);
    for (std::size_t j = 0; j <= p; ++j) CHECK(std::abs(fit.beta(static_cast<Eigen::Index>(j)) - want[j]) < 1e-6);
    CHECK(score(to_eigen(data.X), to_eigen(data.y), fit.beta).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(log_likelihood(to_eigen(data.X), to_eigen(data.y), fit.beta) ==
          doctest::Approx(oracle::loglik(data.X, data.y, want)).epsilon(1e-10));

    std::vector<double> probe(p + 1);
    for (auto& b : probe) b = std::uniform_real_distribution<double>(-1, 1)(g);
    const auto numeric = oracle::numeric_gradient(data.X, data.y, probe);
    const auto analytic = score(to_eigen(data.X), to_eigen(data.y), to_eigen(probe));
    for (std::size_t j = 0; j <= p; ++j) {
      const double a = analytic(static_cast<Eigen::Index>(j));
      CHECK(std::abs(a - numeric[j]) <= 1e-5 * std::max(1.0, std::abs(a)));
    }
  }
}

TEST_CASE("fit report and json carry every label") {
  Eigen::MatrixXd X(6, 2);
  X << 1, 0, 1, 0, 1, 0, 1, 1, 1, 1, 1, 1;
  Eigen::VectorXd y(6);
  y << 1, 0, 0, 1, 1, 0;
  auto fit = fit_logistic(X, y);
  fit.labels = {"intercept", "feedback"};
  const auto j = to_json(fit);
  CHECK(j.dump().find("feedback") != std::string::npos);
  CHECK(render_fit(fit).find("intercept") != std::string::npos);
}
