#include <doctest.h>

#include <algorithm>
#include <set>

#include "avr/core/io.hpp"
#include "avr/evaluator/evaluator.hpp"
#include "avr/gateway/mocks.hpp"
#include "support.hpp"

using namespace avr;
using namespace avr::evaluator;
using gateway::Capability;
using gateway::FunctionClient;

namespace {

const ContentSpec kSpec{"pong", ContentKind::game, "Pong", "Two paddles and a ball"};

Side side(std::string id, double rms, double var, int errors = 0) {
  recorder::AVRecording r;
  r.media_path = "/nonexistent/" + id + ".webm";
  r.audio_rms = rms;
  r.frame_variance = var;
  return {std::move(id), r, errors};
}

FunctionClient always(char slot, Capability cap = Capability::omni) {
  return FunctionClient("fixed", cap, [slot](const gateway::ChatRequest&) {
    return std::string("Both are fine.\nFINAL: ") + slot + "\n";
  });
}

std::string random_words(std::mt19937_64& g, int n) {
  static const std::vector<std::string> words{"the", "game", "Content", "looks", "AB", "BA", "Alpha", "Beta",
                                              "smooth", "audio", "bAd", "a1", "b_2", "lively", "calm"};
  std::string out;
  for (int i = 0; i < n; ++i) out += words[test::uniform(g, 0, static_cast<int>(words.size()) - 1)] + " ";
  return out;
}

/// Independent recount: totals, then wins among the tied, then lowest index.
std::size_t oracle_winner(const std::vector<std::vector<int>>& w) {
  const std::size_t k = w.size();
  std::vector<int> total(k, 0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) total[i] += w[i][j];
  const int best = *std::max_element(total.begin(), total.end());
  std::vector<std::size_t> tied;
  for (std::size_t i = 0; i < k; ++i)
    if (total[i] == best) tied.push_back(i);
  if (tied.size() == 1) return tied[0];
  std::vector<int> h2h(k, -1);
  for (auto i : tied) {
    h2h[i] = 0;
    for (auto j : tied) h2h[i] += w[i][j];
  }
  const int top = *std::max_element(h2h.begin(), h2h.end());
  for (auto i : tied)
    if (h2h[i] == top) return i;
  return tied[0];
}

}  // namespace

TEST_CASE("verdict: last FINAL line wins and is clean") {
  CHECK(parse_verdict("FINAL: A").side == 'A');
  CHECK(parse_verdict("FINAL: A").status == ParseStatus::clean);
  CHECK(parse_verdict("FINAL: B\nthinking\nFINAL: A\n").side == 'A');
  CHECK(parse_verdict("**FINAL:** B").side == 'B');
  CHECK(parse_verdict("final: content a").side == 'A');
}

TEST_CASE("verdict: coerced from the final sentence, else fallback B") {
  const auto c = parse_verdict("A has glitches. Overall I prefer B over A, so A.");
  CHECK(c.side == 'A');
  CHECK(c.status == ParseStatus::coerced);
  const auto f = parse_verdict("Both are lovely and I cannot decide.");
  CHECK(f.side == 'B');
  CHECK(f.status == ParseStatus::fallback);
  CHECK(parse_verdict("").status == ParseStatus::fallback);
}

TEST_CASE("verdict property: a trailing FINAL line always decides") {
  auto g = test::rng(3);
  for (int i = 0; i < 300; ++i) {
    const char want = test::uniform(g, 0, 1) ? 'A' : 'B';
    std::string text = random_words(g, test::uniform(g, 0, 30));
    if (test::uniform(g, 0, 1)) text += "\nFINAL: " + std::string(1, want == 'A' ? 'B' : 'A') + "\n";
    text += random_words(g, test::uniform(g, 0, 5)) + "\nFINAL: " + std::string(1, want) + "\n";
    const auto v = parse_verdict(text);
    CHECK(v.side == want);
    CHECK(v.status == ParseStatus::clean);
  }
}

TEST_CASE("verdict property: text without a standalone slot letter falls back to B") {
  auto g = test::rng(4);
  for (int i = 0; i < 300; ++i) {
    const auto v = parse_verdict(random_words(g, test::uniform(g, 0, 30)));
    CHECK(v.side == 'B');
    CHECK(v.status == ParseStatus::fallback);
  }
}

TEST_CASE("mode tokens") {
  CHECK(parse_mode("full").token() == "111");
  CHECK(parse_mode("010").token() == "010");
  CHECK_THROWS_AS(parse_mode("100"), ValidationError);
  CHECK_THROWS_AS(parse_mode("xyz"), ValidationError);
}

TEST_CASE("model calls per mode") {
  struct Case {
    const char* mode;
    std::size_t omni_calls;
    std::size_t review_calls;
  };
  for (const auto& c : {Case{"111", 3, 1}, Case{"110", 3, 0}, Case{"011", 1, 1}, Case{"010", 1, 0},
                        Case{"001", 2, 1}, Case{"000", 3, 0}}) {
    const std::string token = c.mode;
    CAPTURE(token);
    test::TempDir dir("cmp");
    DirectorySink sink(dir.path());
    auto omni = always('A');
    auto reviewer = always('B', Capability::text_only);
    const auto mode = parse_mode(c.mode);
    const auto rec = compare(side("x", 0, 0), side("y", 0, 0), kSpec, mode, {&omni, &reviewer}, sink, "c1");
    CHECK(omni.calls() == c.omni_calls);
    CHECK(reviewer.calls() == c.review_calls);
    CHECK(rec.omni_transcript.size() == c.omni_calls);
    CHECK(rec.verdict == (mode.review ? 'B' : 'A'));
    CHECK(rec.winner() == (mode.review ? "y" : "x"));
    const auto back = comparison_from(json::parse(io::read_file(dir / "comparisons/c1.json")));
    CHECK(back.verdict == rec.verdict);
    CHECK(back.omni_transcript.size() == c.omni_calls);
    std::size_t transcripts = 0;
    for (const auto& e : fs::directory_iterator(dir / "transcripts")) transcripts += e.is_regular_file();
    CHECK(transcripts == c.omni_calls + c.review_calls);
  }
}

TEST_CASE("a judge that always picks one slot gives a 1-1 duel") {
  test::TempDir dir("duel");
  DirectorySink sink(dir.path());
  for (char slot : {'A', 'B'}) {
    auto omni = always(slot);
    const auto d = duel(side("x", 0.1, 700), side("y", 0, 0), kSpec, parse_mode("110"), {&omni}, sink,
                        std::string("d") + slot);
    CHECK(d.a_wins == 1);
    CHECK(d.b_wins == 1);
    CHECK(d.cmp_ids == std::vector<std::string>{std::string("d") + slot + "-ab", std::string("d") + slot + "-ba"});
  }
}

TEST_CASE("the heuristic judge prefers the livelier recording in both orders") {
  test::TempDir dir("duel");
  DirectorySink sink(dir.path());
  auto omni = gateway::make_mock("heuristic_judge", {{"name", "omni"}});
  auto reviewer = gateway::make_mock("heuristic_judge", {{"name", "rev"}});
  for (std::string mode : {"111", "110", "011", "010", "001", "000"}) {
    CAPTURE(mode);
    const auto d = duel(side("calm", 0, 0.5), side("lively", 0.1, 700), kSpec, parse_mode(mode),
                        {omni.get(), reviewer.get()}, sink, std::string("h") + mode);
    CHECK(d.a_wins == 0);
    CHECK(d.b_wins == 2);
  }
}

TEST_CASE("absent sides lose without model calls") {
  test::TempDir dir("duel");
  DirectorySink sink(dir.path());
  auto omni = always('A');
  const auto d = duel(std::nullopt, side("y", 0, 0), kSpec, {}, {&omni}, sink, "x");
  CHECK(d.a_wins == 0);
  CHECK(d.b_wins == 2);
  const auto none = duel(std::nullopt, std::nullopt, kSpec, {}, {&omni}, sink, "z");
  CHECK(none.a_wins + none.b_wins == 0);
  CHECK(omni.calls() == 0);
}

TEST_CASE("compare refuses text-only judges and a missing reviewer") {
  test::TempDir dir("cmp");
  DirectorySink sink(dir.path());
  auto text = always('A', Capability::text_only);
  CHECK_THROWS_AS(compare(side("x", 0, 0), side("y", 0, 0), kSpec, parse_mode("110"), {&text}, sink, "c"),
                  gateway::CapabilityError);
  auto omni = always('A');
  CHECK_THROWS_AS(compare(side("x", 0, 0), side("y", 0, 0), kSpec, parse_mode("111"), {&omni}, sink, "c"),
                  ValidationError);
}

TEST_CASE("tournament winner matches an exhaustive recount") {
  auto g = test::rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t k = static_cast<std::size_t>(test::uniform(g, 1, 6));
    std::vector<std::vector<int>> w(k, std::vector<int>(k, 0));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j) {
        w[i][j] = test::uniform(g, 0, 2);
        w[j][i] = 2 - w[i][j];
      }
    const auto r = decide_winner(w);
    CHECK(r.winner == oracle_winner(w));
    int sum = 0;
    for (int t : r.totals) sum += t;
    CHECK(sum == static_cast<int>(k * (k - 1)));
    CHECK(r.totals[r.winner] == *std::max_element(r.totals.begin(), r.totals.end()));
    CHECK_FALSE(r.trace.empty());
  }
}

TEST_CASE("round robin visits every pair once and fills the matrix") {
  for (std::size_t workers : {1u, 3u}) {
    std::mutex mu;
    std::set<std::pair<std::size_t, std::size_t>> seen;
    const auto r = round_robin(
        4,
        [&](std::size_t i, std::size_t j) {
          std::lock_guard lock(mu);
          CHECK(seen.emplace(i, j).second);
          CHECK(i < j);
          return DuelResult{j == 3 ? 0 : 2, j == 3 ? 2 : 0, {}};
        },
        workers);
    CHECK(seen.size() == 6);
    CHECK(r.winner == 3);
    CHECK(r.totals == std::vector<int>{4, 2, 0, 6});
    CHECK(r.wins[1][0] == 0);
    CHECK(r.wins[0][1] == 2);
  }
}

TEST_CASE("tournament tie broken head-to-head, then by index") {
  // Rock-paper-scissors with a fourth weak candidate: all three tie on totals
  // and on head-to-head, so index 0 wins.
  std::vector<std::vector<int>> w{{0, 2, 0, 2}, {0, 0, 2, 2}, {2, 0, 0, 2}, {0, 0, 0, 0}};
  auto r = decide_winner(w);
  CHECK(r.winner == 0);
  CHECK(r.trace.back() == "lowest index: 0");
  // 0 and 1 tie on totals; 1 beat 0 head to head.
  std::vector<std::vector<int>> v{{0, 0, 2, 2}, {2, 0, 1, 1}, {0, 1, 0, 1}, {0, 1, 1, 0}};
  r = decide_winner(v);
  CHECK(r.totals == std::vector<int>{4, 4, 2, 2});
  CHECK(r.winner == 1);
}
