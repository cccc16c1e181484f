#include <set>

#include "avr/analysis/analysis.hpp"
#include "avr/core/errors.hpp"

namespace avr::analysis {

Design build_design(const std::vector<TrialRow>& rows, const std::string& baseline_model, ContentKind baseline_kind) {
  if (rows.empty()) throw ValidationError("no rows to build a design from");
  std::set<std::string> models;
  for (const auto& r : rows) models.insert(r.model);
  if (!models.contains(baseline_model)) {
    std::string known;
    for (const auto& m : models) known += (known.empty() ? "" : ", ") + m;
    throw ValidationError("baseline model '" + baseline_model + "' not in rows (models: " + known + ")");
  }
  models.erase(baseline_model);
  const auto other_kind = baseline_kind == ContentKind::game ? ContentKind::animation : ContentKind::game;

  Design d;
  d.labels = {"intercept", "assets", "feedback", "init_best", std::string(to_string(other_kind))};
  for (const auto& m : models) d.labels.push_back("model:" + m);
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(d.labels.size());
  d.X = Eigen::MatrixXd::Zero(n, p);
  d.y = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    d.X(i, 0) = 1.0;
    d.X(i, 1) = r.features.assets;
    d.X(i, 2) = r.features.feedback;
    d.X(i, 3) = r.features.init_best;
    d.X(i, 4) = r.kind == other_kind ? 1.0 : 0.0;
    if (r.model != baseline_model) {
      const auto idx = std::distance(models.begin(), models.find(r.model));
      d.X(i, 5 + idx) = 1.0;
    }
    d.y(i) = r.win;
  }
  for (Eigen::Index j = 1; j < p; ++j)
    if ((d.X.col(j).array() == d.X(0, j)).all()) d.constant_columns.push_back(d.labels[static_cast<std::size_t>(j)]);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.X);
  d.rank_deficient = qr.rank() < p;
  return d;
}

}  // namespace avr::analysis
