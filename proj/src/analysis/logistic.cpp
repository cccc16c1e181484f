#include <cmath>

#include "avr/analysis/analysis.hpp"
#include "avr/core/errors.hpp"

namespace avr::analysis {

namespace {

constexpr double kSeparableBeta = 15.0;

// log(1 + exp(x)) without overflow.
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = X * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) ll += y(i) * eta(i) - softplus(eta(i));
  return ll;
}

Eigen::VectorXd score(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = X * beta;
  Eigen::VectorXd resid(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) resid(i) = y(i) - sigmoid(eta(i));
  return X.transpose() * resid;
}

LogitFit fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double tol, int max_iter) {
  const auto n = X.rows();
  const auto p = X.cols();
  if (n != y.size()) throw ValidationError("design has " + std::to_string(n) + " rows but y has " +
                                           std::to_string(y.size()));
  if (n == 0 || p == 0) throw ValidationError("empty design");
  for (Eigen::Index i = 0; i < n; ++i)
    if (y(i) != 0.0 && y(i) != 1.0) throw ValidationError("y must be 0 or 1");

  auto information = [&](const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = X * beta;
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double m = sigmoid(eta(i));
      w(i) = m * (1.0 - m);
    }
    return Eigen::MatrixXd(X.transpose() * w.asDiagonal() * X);
  };

  LogitFit fit;
  fit.beta = Eigen::VectorXd::Zero(p);
  fit.loglik = log_likelihood(X, y, fit.beta);
  for (fit.iterations = 0; fit.iterations < max_iter; ++fit.iterations) {
    const Eigen::VectorXd s = score(X, y, fit.beta);
    if (s.cwiseAbs().maxCoeff() < tol) {
      fit.converged = true;
      break;
    }
    const Eigen::MatrixXd info = information(fit.beta);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(info);
    if (qr.rank() < p) throw ValidationError("information matrix is singular (rank-deficient design)");
    Eigen::VectorXd step = qr.solve(s);
    Eigen::VectorXd next = fit.beta + step;
    double ll = log_likelihood(X, y, next);
    // Near the optimum the log-likelihood is flat to rounding; halve only on a real drop.
    const double slack = 1e-12 * (1.0 + std::abs(fit.loglik));
    for (int halve = 0; halve < 30 && ll < fit.loglik - slack; ++halve) {
      step /= 2.0;
      next = fit.beta + step;
      ll = log_likelihood(X, y, next);
    }
    const bool improved = ll > fit.loglik;
    fit.beta = next;
    fit.loglik = ll;
    if (improved && fit.beta.cwiseAbs().maxCoeff() > kSeparableBeta) {
      fit.separable = true;
      ++fit.iterations;
      break;
    }
  }

  const Eigen::MatrixXd info = information(fit.beta);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(info);
  fit.se = Eigen::VectorXd::Constant(p, std::numeric_limits<double>::quiet_NaN());
  if (qr.rank() == p) fit.se = qr.inverse().diagonal().cwiseSqrt();
  if (!fit.separable) {
    for (Eigen::Index j = 0; j < p; ++j) {
      const Interval ci{fit.beta(j) - kZ95 * fit.se(j), fit.beta(j) + kZ95 * fit.se(j)};
      fit.ci95.push_back(ci);
      fit.ci95_prob.push_back({sigmoid(ci.lo), sigmoid(ci.hi)});
    }
  }
  return fit;
}

LogitFit fit_logistic(const Design& design, double tol, int max_iter) {
  if (design.rank_deficient) {
    std::string which;
    for (const auto& c : design.constant_columns) which += (which.empty() ? "" : ", ") + c;
    throw ValidationError("design matrix is rank-deficient" +
                          (which.empty() ? std::string() : " (constant columns: " + which + ")"));
  }
  auto fit = fit_logistic(design.X, design.y, tol, max_iter);
  fit.labels = design.labels;
  return fit;
}

}  // namespace avr::analysis
