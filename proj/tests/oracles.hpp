#pragma once
// Reference computations written without the engine's code paths.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace avr::oracle {

using Matrix = std::vector<std::vector<double>>;

struct TournamentOutcome {
  std::size_t winner = 0;
  std::vector<std::string> trace;
};

/// Most wins, then wins among the tied, then lowest index.
inline TournamentOutcome tournament(const std::vector<std::vector<int>>& w) {
  const std::size_t k = w.size();
  auto list = [](const std::vector<std::size_t>& xs) {
    std::string s;
    for (auto x : xs) s += (s.empty() ? "" : ",") + std::to_string(x);
    return s;
  };
  std::vector<int> total(k, 0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) total[i] += w[i][j];
  int best = total[0];
  for (int t : total) best = std::max(best, t);
  std::vector<std::size_t> tied;
  for (std::size_t i = 0; i < k; ++i)
    if (total[i] == best) tied.push_back(i);
  TournamentOutcome out;
  out.trace.push_back("most wins (" + std::to_string(best) + "): " + list(tied));
  if (tied.size() == 1) {
    out.winner = tied[0];
    return out;
  }
  std::map<std::size_t, int> h2h;
  int top = 0;
  for (auto i : tied) {
    for (auto j : tied) h2h[i] += w[i][j];
    top = std::max(top, h2h[i]);
  }
  std::vector<std::size_t> still;
  for (auto i : tied)
    if (h2h[i] == top) still.push_back(i);
  out.trace.push_back("head-to-head among tied (" + std::to_string(top) + "): " + list(still));
  if (still.size() > 1) out.trace.push_back("lowest index: " + std::to_string(still[0]));
  out.winner = still[0];
  return out;
}

struct Cell {
  double mean = 0;
  double sd = 0;
  int n = 0;
};

/// Per-content percentages, then mean and sample sd via sums of squares.
/// `records` holds (group, content, win).
inline std::map<std::string, Cell> winrates(const std::vector<std::tuple<std::string, std::string, int>>& records) {
  std::map<std::string, std::map<std::string, std::pair<double, double>>> t;
  for (const auto& [g, c, win] : records) {
    t[g][c].first += win;
    t[g][c].second += 1;
  }
  std::map<std::string, Cell> out;
  for (const auto& [g, per] : t) {
    double s = 0, s2 = 0;
    for (const auto& [c, wr] : per) {
      const double pct = 100.0 * wr.first / wr.second;
      s += pct;
      s2 += pct * pct;
    }
    const double n = static_cast<double>(per.size());
    Cell cell;
    cell.n = static_cast<int>(per.size());
    cell.mean = s / n;
    cell.sd = per.size() > 1 ? std::sqrt(std::max(0.0, (s2 - n * cell.mean * cell.mean) / (n - 1))) : 0.0;
    out[g] = cell;
  }
  return out;
}

inline double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline double loglik(const Matrix& X, const std::vector<double>& y, const std::vector<double>& b) {
  double ll = 0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    double z = 0;
    for (std::size_t j = 0; j < b.size(); ++j) z += X[i][j] * b[j];
    // log p = -log(1+e^-z), log(1-p) = -log(1+e^z)
    ll += y[i] > 0.5 ? -std::log1p(std::exp(-z)) : -std::log1p(std::exp(z));
  }
  return ll;
}

inline std::vector<double> gradient(const Matrix& X, const std::vector<double>& y, const std::vector<double>& b) {
  std::vector<double> g(b.size(), 0.0);
  for (std::size_t i = 0; i < X.size(); ++i) {
    double z = 0;
    for (std::size_t j = 0; j < b.size(); ++j) z += X[i][j] * b[j];
    const double r = y[i] - logistic(z);
    for (std::size_t j = 0; j < b.size(); ++j) g[j] += X[i][j] * r;
  }
  return g;
}

/// Central differences of loglik.
inline std::vector<double> numeric_gradient(const Matrix& X, const std::vector<double>& y, std::vector<double> b,
                                            double h = 1e-5) {
  std::vector<double> g(b.size());
  for (std::size_t j = 0; j < b.size(); ++j) {
    const double keep = b[j];
    b[j] = keep + h;
    const double up = loglik(X, y, b);
    b[j] = keep - h;
    const double down = loglik(X, y, b);
    b[j] = keep;
    g[j] = (up - down) / (2 * h);
  }
  return g;
}

/// Fixed-step gradient ascent with step 1/L, L = max eigenvalue of X'X / 4
/// found by power iteration. Stops when max |gradient| < tol.
inline std::vector<double> gradient_ascent(const Matrix& X, const std::vector<double>& y, double tol = 1e-11,
                                           long max_iter = 5'000'000) {
  const std::size_t p = X.empty() ? 0 : X[0].size();
  Matrix xtx(p, std::vector<double>(p, 0.0));
  for (const auto& row : X)
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t c = 0; c < p; ++c) xtx[a][c] += row[a] * row[c];
  std::vector<double> v(p, 1.0);
  double lambda = 0;
  for (int it = 0; it < 500; ++it) {
    std::vector<double> w(p, 0.0);
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t c = 0; c < p; ++c) w[a] += xtx[a][c] * v[c];
    double norm = 0;
    for (double x : w) norm += x * x;
    norm = std::sqrt(norm);
    lambda = norm;
    for (std::size_t a = 0; a < p; ++a) v[a] = w[a] / norm;
  }
  const double step = 4.0 / (lambda * 1.01);
  std::vector<double> b(p, 0.0);
  for (long it = 0; it < max_iter; ++it) {
    const auto g = gradient(X, y, b);
    double worst = 0;
    for (double x : g) worst = std::max(worst, std::abs(x));
    if (worst < tol) break;
    for (std::size_t j = 0; j < p; ++j) b[j] += step * g[j];
  }
  return b;
}

struct Dataset {
  Matrix X;
  std::vector<double> y;
};

/// Intercept plus `features` standard-normal columns; y from a logistic model
/// with coefficients in [-1, 1].
inline Dataset random_logit_data(std::mt19937_64& g, std::size_t n, std::size_t features) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> coef(-1.0, 1.0), unit(0.0, 1.0);
  std::vector<double> truth(features + 1);
  for (auto& t : truth) t = coef(g);
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row{1.0};
    for (std::size_t j = 0; j < features; ++j) row.push_back(normal(g));
    double z = 0;
    for (std::size_t j = 0; j <= features; ++j) z += row[j] * truth[j];
    d.y.push_back(unit(g) < logistic(z) ? 1.0 : 0.0);
    d.X.push_back(std::move(row));
  }
  return d;
}

}  // namespace avr::oracle
