#include <cmath>
#include <cstdio>

#include "avr/analysis/analysis.hpp"

namespace avr::analysis {

namespace {

std::string fixed(double v, int digits) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

std::string render_winrates(const std::vector<WinrateCell>& cells) {
  std::size_t width = 5;
  for (const auto& c : cells) width = std::max(width, c.group.size());
  std::string out = pad("group", width) + "  win% mean (sd)   contents\n";
  for (const auto& c : cells) {
    out += pad(c.group, width) + "  " + pad(fixed(c.mean_pct, 2) + " (" + fixed(c.sd_pct, 2) + ")", 17) +
           std::to_string(c.n_contents) + (c.sd_undefined ? "  sd undefined" : "") + "\n";
  }
  return out;
}

std::string render_fit(const LogitFit& fit) {
  std::size_t width = 9;
  for (const auto& l : fit.labels) width = std::max(width, l.size());
  std::string out = pad("term", width) + "  beta        se          ci95 (logit)           ci95 (prob)\n";
  for (Eigen::Index j = 0; j < fit.beta.size(); ++j) {
    const auto i = static_cast<std::size_t>(j);
    const auto label = i < fit.labels.size() ? fit.labels[i] : "x" + std::to_string(j);
    out += pad(label, width) + "  " + pad(fixed(fit.beta(j), 6), 12) + pad(fixed(fit.se(j), 6), 12);
    if (i < fit.ci95.size())
      out += pad("[" + fixed(fit.ci95[i].lo, 4) + ", " + fixed(fit.ci95[i].hi, 4) + "]", 23) + "[" +
             fixed(fit.ci95_prob[i].lo, 4) + ", " + fixed(fit.ci95_prob[i].hi, 4) + "]";
    else
      out += "suppressed";
    out += "\n";
  }
  out += "loglik " + fixed(fit.loglik, 6) + ", iterations " + std::to_string(fit.iterations) +
         (fit.converged ? ", converged" : ", not converged") + (fit.separable ? ", separable" : "") + "\n";
  return out;
}

nlohmann::json to_json(const LogitFit& fit) {
  nlohmann::json terms = nlohmann::json::array();
  for (Eigen::Index j = 0; j < fit.beta.size(); ++j) {
    const auto i = static_cast<std::size_t>(j);
    nlohmann::json t{{"label", i < fit.labels.size() ? fit.labels[i] : "x" + std::to_string(j)},
                     {"beta", fit.beta(j)},
                     {"se", finite_or_null(fit.se(j))},
                     {"odds_ratio", std::exp(fit.beta(j))}};
    if (i < fit.ci95.size()) {
      t["ci95_logit"] = {fit.ci95[i].lo, fit.ci95[i].hi};
      t["ci95_odds_ratio"] = {std::exp(fit.ci95[i].lo), std::exp(fit.ci95[i].hi)};
      t["ci95_prob"] = {fit.ci95_prob[i].lo, fit.ci95_prob[i].hi};
    }
    terms.push_back(std::move(t));
  }
  return {{"terms", std::move(terms)},
          {"loglik", fit.loglik},
          {"iterations", fit.iterations},
          {"converged", fit.converged},
          {"separable", fit.separable}};
}

}  // namespace avr::analysis
