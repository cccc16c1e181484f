#include <algorithm>
#include <numeric>

#include "avr/core/errors.hpp"
#include "avr/core/parallel.hpp"
#include "avr/evaluator/evaluator.hpp"

namespace avr::evaluator {

namespace {

std::string join(const std::vector<std::size_t>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + std::to_string(xs[i]);
  return out;
}

}  // namespace

nlohmann::json to_json(const TournamentResult& r) {
  return {{"winner", r.winner}, {"wins", r.wins}, {"totals", r.totals}, {"trace", r.trace}};
}

TournamentResult decide_winner(std::vector<std::vector<int>> wins) {
  const auto k = wins.size();
  if (k == 0) throw ValidationError("tournament needs at least one candidate");
  for (const auto& row : wins)
    if (row.size() != k) throw ValidationError("tournament win matrix is not square");

  TournamentResult r;
  r.totals.assign(k, 0);
  for (std::size_t i = 0; i < k; ++i) r.totals[i] = std::accumulate(wins[i].begin(), wins[i].end(), 0);

  const int best = *std::max_element(r.totals.begin(), r.totals.end());
  std::vector<std::size_t> tied;
  for (std::size_t i = 0; i < k; ++i)
    if (r.totals[i] == best) tied.push_back(i);
  r.trace.push_back("most wins (" + std::to_string(best) + "): " + join(tied));

  if (tied.size() > 1) {
    std::vector<int> h2h(tied.size(), 0);
    for (std::size_t a = 0; a < tied.size(); ++a)
      for (std::size_t b = 0; b < tied.size(); ++b) h2h[a] += wins[tied[a]][tied[b]];
    const int top = *std::max_element(h2h.begin(), h2h.end());
    std::vector<std::size_t> still;
    for (std::size_t a = 0; a < tied.size(); ++a)
      if (h2h[a] == top) still.push_back(tied[a]);
    r.trace.push_back("head-to-head among tied (" + std::to_string(top) + "): " + join(still));
    tied = std::move(still);
    if (tied.size() > 1) r.trace.push_back("lowest index: " + std::to_string(tied.front()));
  }
  r.winner = tied.front();
  r.wins = std::move(wins);
  return r;
}

TournamentResult round_robin(std::size_t k, const DuelFn& duel, std::size_t workers) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) pairs.emplace_back(i, j);
  std::vector<DuelResult> results(pairs.size());
  parallel_for(pairs.size(), workers, [&](std::size_t n) { results[n] = duel(pairs[n].first, pairs[n].second); });

  std::vector<std::vector<int>> wins(k, std::vector<int>(k, 0));
  for (std::size_t n = 0; n < pairs.size(); ++n) {
    const auto [i, j] = pairs[n];
    wins[i][j] = results[n].a_wins;
    wins[j][i] = results[n].b_wins;
  }
  return decide_winner(std::move(wins));
}

}  // namespace avr::evaluator
