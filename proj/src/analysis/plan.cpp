#include "avr/analysis/analysis.hpp"
#include "avr/core/errors.hpp"

namespace avr::analysis {

Dataset parse_dataset(std::string_view token) {
  if (token == "a") return Dataset::a;
  if (token == "b") return Dataset::b;
  if (token == "c") return Dataset::c;
  throw ValidationError("unknown dataset '" + std::string(token) + "' (expected a, b or c)");
}

std::string_view to_string(Dataset dataset) {
  switch (dataset) {
    case Dataset::a:
      return "a";
    case Dataset::b:
      return "b";
    case Dataset::c:
      return "c";
  }
  return "?";
}

Features Features::from_setting(int setting) { return {setting & 1, (setting >> 1) & 1, (setting >> 2) & 1}; }

std::vector<PlanTask> enumerate_plan(Dataset dataset, const PlanSize& size) {
  if (size.n_contents < 1 || size.n_models < 1 || size.n_settings < 1)
    throw ValidationError("plan sizes must be positive");
  std::vector<PlanTask> out;
  for (int c = 0; c < size.n_contents; ++c) {
    switch (dataset) {
      case Dataset::a:
        for (int m = 0; m < size.n_models; ++m)
          for (int s = 0; s < size.n_settings; ++s)
            for (int t = 0; t < size.n_settings; ++t)
              if (s != t)
                for (bool first : {true, false}) out.push_back({c, {m, s, true}, {m, t, true}, first});
        break;
      case Dataset::b:
        for (int m = 0; m < size.n_models; ++m)
          for (int s = 0; s < size.n_settings; ++s)
            for (bool first : {true, false}) out.push_back({c, {m, s, true}, {m, s, false}, first});
        break;
      case Dataset::c:
        for (int s = 0; s < size.n_settings; ++s)
          for (int m = 0; m < size.n_models; ++m)
            for (int n = 0; n < size.n_models; ++n)
              if (m != n)
                for (bool first : {true, false}) out.push_back({c, {m, s, true}, {n, s, true}, first});
        break;
    }
  }
  return out;
}

std::string plan_breakdown(Dataset dataset, const PlanSize& size) {
  const long c = size.n_contents, m = size.n_models, s = size.n_settings;
  auto n = [](long v) { return std::to_string(v); };
  switch (dataset) {
    case Dataset::a:
      return n(c) + "*" + n(m) + "*" + n(s) + "*(" + n(s) + "-1)*2=" + n(c * m * s * (s - 1) * 2);
    case Dataset::b:
      return n(c) + "*" + n(m) + "*" + n(s) + "*2=" + n(c * m * s * 2);
    case Dataset::c:
      return n(c) + "*" + n(s) + "*" + n(m) + "*(" + n(m) + "-1)*2=" + n(c * s * m * (m - 1) * 2);
  }
  return {};
}

}  // namespace avr::analysis
