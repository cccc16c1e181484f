#include <doctest.h>

#include <chrono>
#include <map>
#include <sstream>

#include "avr/cli/cli.hpp"
#include "avr/core/io.hpp"
#include "avr/gateway/remote.hpp"
#include "support.hpp"

using namespace avr;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome avr_cmd(std::vector<std::string> args) {
  args.insert(args.begin(), "avr");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files[fs::relative(e.path(), root).generic_string()] = io::read_file(e.path());
  return files;
}

Outcome mock_run(const fs::path& out, const std::string& workers = "2") {
  return avr_cmd({"agent", "run", "--mock", "--config", test::fixture("mock.cfg").string(), "--spec", "bouncing-ball",
                  "--out", out.string(), "--workers", workers});
}

}  // namespace

TEST_CASE("help and usage errors") {
  const auto help = avr_cmd({"--help"});
  CHECK(help.code == 0);
  for (const char* sub : {"bench", "agent", "eval", "record", "experiment", "analyze"})
    CHECK(help.out.find(sub) != std::string::npos);
  const auto run_help = avr_cmd({"agent", "run", "--help"});
  CHECK(run_help.code == 0);
  CHECK(run_help.out.find("--mock") != std::string::npos);
  CHECK(run_help.out.find("--workers") != std::string::npos);
  CHECK(avr_cmd({"frobnicate"}).code == cli::kValidation);
  CHECK(avr_cmd({}).code == cli::kValidation);
  CHECK(avr_cmd({"experiment", "plan", "--dataset", "z"}).code == cli::kValidation);
  CHECK(avr_cmd({"agent", "run", "--mock", "--spec", "no-such-item"}).code == cli::kValidation);
}

TEST_CASE("experiment plan prints counts and the product") {
  const auto a = avr_cmd({"experiment", "plan", "--dataset", "a"});
  CHECK(a.code == 0);
  CHECK(a.out == "10080\n10*9*8*(8-1)*2=10080\n");
  CHECK(avr_cmd({"experiment", "plan", "--dataset", "b"}).out == "1440\n10*9*8*2=1440\n");
  CHECK(avr_cmd({"experiment", "plan", "--dataset", "c"}).out == "11520\n10*8*9*(9-1)*2=11520\n");
}

TEST_CASE("bench list shows the shipped items") {
  const auto r = avr_cmd({"bench", "list"});
  CHECK(r.code == 0);
  CHECK(r.out.find("bouncing-ball  animation  easy_moderate") != std::string::npos);
  CHECK(r.out.find("arpg-2d-top-down  game  hard") != std::string::npos);
}

TEST_CASE("offline agent run selects the lively candidate, resumes and is deterministic") {
  test::TempDir dir("cli");
  const auto before = gateway::NetworkPolicy::attempts();
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = mock_run(dir / "r1");
  const auto elapsed = std::chrono::steady_clock::now() - t0;
  INFO(r.err);
  REQUIRE(r.code == 0);
  CHECK(elapsed < std::chrono::seconds(60));
  CHECK(gateway::NetworkPolicy::attempts() == before);
  CHECK(r.out.find("recorder: simulated") != std::string::npos);
  CHECK(r.out.find("initial_version: v003") != std::string::npos);
  CHECK(r.out.find("terminated_reason: iterations_exhausted") != std::string::npos);
  const auto t = json::parse(io::read_file(dir / "r1/tournament.json"));
  CHECK(t.at("winner") == 2);
  CHECK(t.at("totals") == json::array({0, 2, 4}));
  CHECK(fs::exists(dir / "r1/result"));

  const auto files = tree(dir / "r1");
  const auto again = mock_run(dir / "r1");
  CHECK(again.code == 0);
  CHECK(again.out.find("(resumed)") != std::string::npos);
  CHECK(tree(dir / "r1") == files);

  CHECK(mock_run(dir / "r2", "1").code == 0);
  CHECK(tree(dir / "r2") == files);
}

TEST_CASE("eval tournament over a finished run agrees with the run's own choice") {
  test::TempDir dir("cli");
  REQUIRE(mock_run(dir / "r").code == 0);
  const auto r = avr_cmd({"eval", "tournament", (dir / "r").string(), "--k", "3", "--mock", "--config",
                          test::fixture("mock.cfg").string(), "--out", (dir / "t").string()});
  INFO(r.err);
  CHECK(r.code == 0);
  CHECK(r.out.find("winner: candidate 2") != std::string::npos);
}

TEST_CASE("analyze commands over a rows file") {
  test::TempDir dir("cli");
  std::vector<analysis::TrialRow> rows;
  for (int c = 0; c < 3; ++c)
    for (int s = 0; s < 8; ++s)
      for (int i = 0; i < 4; ++i)
        rows.push_back({"c" + std::to_string(c), c == 0 ? ContentKind::game : ContentKind::animation, "m",
                        analysis::Features::from_setting(s), "o", (i + s + c) % 3 == 0 ? 1 : 0});
  io::write_file_atomic(dir / "rows.jsonl", analysis::rows_to_jsonl(rows));
  const auto w = avr_cmd({"analyze", "winrates", "--in", (dir / "rows.jsonl").string(), "--group-by", "feedback"});
  INFO(w.err);
  CHECK(w.code == 0);
  CHECK(w.out.find("feedback=1") != std::string::npos);
  const auto l = avr_cmd({"analyze", "logit", "--in", (dir / "rows.jsonl").string(), "--intercept-only", "--out",
                          (dir / "fit.json").string()});
  CHECK(l.code == 0);
  CHECK(l.out.find("rows: 96") != std::string::npos);
  CHECK(fs::exists(dir / "fit.json"));
  const auto bad = avr_cmd({"analyze", "winrates", "--in", (dir / "rows.jsonl").string(), "--group-by", "colour"});
  CHECK(bad.code == cli::kValidation);
}
