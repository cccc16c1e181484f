#include <atomic>
#include <map>
#include <mutex>
#include <ostream>

#include "avr/agent/agent.hpp"
#include "avr/assetbank/assetbank.hpp"
#include "avr/cli/cli.hpp"
#include "avr/core/benchmark.hpp"
#include "avr/core/errors.hpp"
#include "avr/core/io.hpp"
#include "avr/core/parallel.hpp"
#include "avr/recorder/run_io.hpp"

namespace avr::cli {

namespace {

std::string safe(std::string s) {
  for (auto& ch : s)
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_' && ch != '.') ch = '_';
  return s;
}

struct ArmRun {
  ContentSpec spec;
  std::string model;
  int setting = 0;
  fs::path dir;
};

struct Task {
  std::string cmp_id;
  const ArmRun* a = nullptr;
  bool a_final = true;
  const ArmRun* b = nullptr;
  bool b_final = true;
};

std::optional<evaluator::Side> side_of(const ArmRun& arm, bool final_stage, recorder::Recorder& rec) {
  const auto f = analysis::Features::from_setting(arm.setting);
  return run_side(arm.dir, final_stage, rec, analysis::arm_label(arm.spec.id, arm.model, f, final_stage));
}

}  // namespace

std::optional<evaluator::Side> run_side(const fs::path& run_dir, bool final_stage, recorder::Recorder& rec,
                                        const std::string& label) {
  if (!fs::exists(run_dir / RunHandle::kResult)) return std::nullopt;
  auto run = RunHandle::open_existing(run_dir);
  const auto result = run->step_data("result");
  if (!result || result->at("terminated_reason") == "aborted") return std::nullopt;
  int id = result->at(final_stage ? "final_version_id" : "initial_version_id").get<int>();
  auto side = version_side(*run, id, rec);
  if (side && !label.empty()) side->content_id = label;
  return side;
}

std::optional<evaluator::Side> version_side(RunHandle& run, int version_id, recorder::Recorder& rec) {
  int id = version_id;
  if (const auto v = run.version(id); v && v->stage == VersionStage::best_initial && v->parent) id = *v->parent;
  const auto v = run.version(id);
  if (!v) throw ValidationError("version " + version_stem(id) + " is not in " + run.dir().string());
  const auto step = "record/" + version_stem(id);
  if (!run.step_done(step)) {
    auto tx = run.begin_step(step);
    const auto stored = recorder::record_into(rec, tx, *v, run.config().record_opts);
    run.commit(tx, recorder::to_step_data(stored, run.dir()));
  }
  const auto data = *run.step_data(step);
  if (data.value("failed", false)) return std::nullopt;
  const auto stored = recorder::load_stored(data, run.dir());
  return evaluator::Side{version_stem(version_id), stored.recording, stored.log.error_count()};
}

ExperimentSummary execute_experiment(analysis::Dataset dataset, const EngineConfig& config,
                                     gateway::ClientRegistry& registry, recorder::Recorder& recorder,
                                     const fs::path& out, std::size_t workers, std::ostream& log) {
  const auto& ex = config.experiment;
  std::vector<std::string> models = ex.models;
  if (models.empty()) models.push_back(config.run.coder_model.empty() ? "coder" : config.run.coder_model);
  std::vector<int> settings = ex.settings;
  if (settings.empty())
    for (int s = 0; s < 8; ++s) settings.push_back(s);

  std::vector<ContentSpec> specs;
  const auto shipped = load_shipped_benchmarks();
  if (ex.specs.empty()) {
    specs = load_benchmark(default_data_dir() / "benchmarks" / "easy_moderate.yaml");
  } else {
    for (const auto& id : ex.specs) {
      auto s = find_spec(shipped, id);
      if (!s) throw ValidationError("experiment spec '" + id + "' is not in the shipped benchmarks");
      specs.push_back(*s);
    }
  }

  std::optional<assetbank::PackIndex> bank;
  for (int s : settings)
    if (analysis::Features::from_setting(s).assets && !bank) {
      if (ex.asset_root.empty()) throw ValidationError("settings with assets need experiment.asset_root");
      bank = fs::exists(ex.asset_root / assetbank::kIndexFile) ? assetbank::load_index(ex.asset_root)
                                                                : assetbank::index_packs(ex.asset_root, workers);
    }

  auto coder_of = [&](const std::string& m) { return registry.get(m); };
  auto omni = registry.get(config.run.omni_model.empty() ? "omni" : config.run.omni_model);
  gateway::ClientPtr reviewer;
  if (!config.run.reviewer_model.empty()) reviewer = registry.get(config.run.reviewer_model);
  if (config.eval_mode.review && !reviewer) throw ValidationError("eval mode needs run.reviewer_model");

  std::vector<ArmRun> arms;
  std::map<std::tuple<std::size_t, std::size_t, int>, std::size_t> arm_index;
  for (std::size_t c = 0; c < specs.size(); ++c)
    for (std::size_t m = 0; m < models.size(); ++m)
      for (int s : settings) {
        arm_index[{c, m, s}] = arms.size();
        arms.push_back({specs[c], models[m], s,
                        out / "runs" / safe(specs[c].id) / safe(models[m]) / ("s" + std::to_string(s))});
      }

  ExperimentSummary summary;
  std::atomic<std::size_t> failed{0};
  std::mutex log_mu;
  parallel_for(arms.size(), workers, [&](std::size_t i) {
    const auto& arm = arms[i];
    auto cfg = config.run;
    const auto f = analysis::Features::from_setting(arm.setting);
    cfg.coder_model = arm.model;
    cfg.with_assets = f.assets != 0;
    cfg.with_feedback = f.feedback != 0;
    cfg.k_initial = f.init_best ? ex.k_best : 1;
    try {
      auto run = RunHandle::open(arm.dir, cfg, arm.spec);
      const auto coder = coder_of(arm.model);
      agent::Clients clients{coder.get(), omni.get(), reviewer.get(), &recorder, nullptr};
      agent::run(*run, bank, clients, {1, config.eval_mode});
    } catch (const ValidationError&) {
      throw;
    } catch (const Error& e) {
      ++failed;
      std::lock_guard lock(log_mu);
      log << "run " << arm.dir.string() << " failed: " << e.what() << "\n";
    }
  });
  summary.runs = arms.size();
  summary.failed_runs = failed;

  std::vector<Task> tasks;
  for (std::size_t c = 0; c < specs.size(); ++c) {
    const auto cid = safe(specs[c].id);
    auto both = [&](const std::string& id, const ArmRun* x, bool xf, const ArmRun* y, bool yf) {
      tasks.push_back({id + "-ab", x, xf, y, yf});
      tasks.push_back({id + "-ba", y, yf, x, xf});
    };
    switch (dataset) {
      case analysis::Dataset::a:
        for (std::size_t m = 0; m < models.size(); ++m)
          for (std::size_t i = 0; i < settings.size(); ++i)
            for (std::size_t j = i + 1; j < settings.size(); ++j)
              both(cid + "__" + safe(models[m]) + "__s" + std::to_string(settings[i]) + "-s" +
                       std::to_string(settings[j]),
                   &arms[arm_index[{c, m, settings[i]}]], true, &arms[arm_index[{c, m, settings[j]}]], true);
        break;
      case analysis::Dataset::b:
        for (std::size_t m = 0; m < models.size(); ++m)
          for (int s : settings) {
            const auto* arm = &arms[arm_index[{c, m, s}]];
            both(cid + "__" + safe(models[m]) + "__s" + std::to_string(s) + "-final-initial", arm, true, arm, false);
          }
        break;
      case analysis::Dataset::c:
        for (int s : settings)
          for (std::size_t m = 0; m < models.size(); ++m)
            for (std::size_t n = m + 1; n < models.size(); ++n)
              both(cid + "__s" + std::to_string(s) + "__" + safe(models[m]) + "-" + safe(models[n]),
                   &arms[arm_index[{c, m, s}]], true, &arms[arm_index[{c, n, s}]], true);
        break;
    }
  }

  const auto ds_dir = out / ("dataset-" + std::string(analysis::to_string(dataset)));
  DirectorySink sink(ds_dir);
  const evaluator::Judges judges{omni.get(), reviewer.get(), config.run.eval_temperature, config.run.seed, nullptr};
  std::map<std::pair<const ArmRun*, bool>, std::optional<evaluator::Side>> sides;
  for (const auto& t : tasks)
    for (auto key : {std::make_pair(t.a, t.a_final), std::make_pair(t.b, t.b_final)})
      if (!sides.contains(key)) sides[key] = side_of(*key.first, key.second, recorder);
  std::atomic<std::size_t> judged{0}, missing{0};
  parallel_for(tasks.size(), workers, [&](std::size_t i) {
    const auto& t = tasks[i];
    if (fs::exists(ds_dir / "comparisons" / (t.cmp_id + ".json"))) {
      ++judged;
      return;
    }
    const auto& a = sides.at({t.a, t.a_final});
    const auto& b = sides.at({t.b, t.b_final});
    if (!a || !b) {
      ++missing;
      return;
    }
    evaluator::compare(*a, *b, t.a->spec, config.eval_mode, judges, sink, t.cmp_id);
    ++judged;
  });
  summary.comparisons = judged;

  std::map<std::string, ContentKind> kinds;
  for (const auto& s : shipped) kinds[s.id] = s.kind;
  for (const auto& s : specs) kinds[s.id] = s.kind;
  const auto rows = analysis::rows_from_outcomes(analysis::load_outcomes(ds_dir), kinds);
  io::write_file_atomic(ds_dir / "rows.jsonl", analysis::rows_to_jsonl(rows));
  summary.rows = rows.size();
  if (summary.failed_runs > 0 || missing > 0)
    throw PartialFailure(std::to_string(summary.failed_runs) + " runs failed and " + std::to_string(missing.load()) +
                         " comparisons could not be judged; rerun to resume");
  return summary;
}

}  // namespace avr::cli
