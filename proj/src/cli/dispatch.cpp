#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <ostream>
#include <sstream>

#include "avr/agent/agent.hpp"
#include "avr/assetbank/assetbank.hpp"
#include "avr/cli/cli.hpp"
#include "avr/core/benchmark.hpp"
#include "avr/core/errors.hpp"
#include "avr/core/io.hpp"
#include "avr/core/parallel.hpp"
#include "avr/gateway/remote.hpp"

namespace avr::cli {

namespace {

struct Common {
  bool mock = false;
  std::size_t workers = default_workers();
  std::string config;
};

void add_common(CLI::App* cmd, Common& c, bool with_config) {
  cmd->add_flag_callback(
      "--mock",
      [&c] {
        c.mock = true;
        gateway::NetworkPolicy::deny(true);
      },
      "Use offline mock models instead of configured endpoints; network access is refused");
  cmd->add_option("--workers", c.workers, "Worker threads (default: logical cores, at most 8)")
      ->check(CLI::Range(1, 64));
  if (with_config) cmd->add_option("--config", c.config, "Engine config file");
}

EngineConfig config_or_default(const Common& c) {
  if (c.config.empty()) return {};
  return load_config(c.config);
}

std::string role(const std::string& configured, const char* fallback) {
  return configured.empty() ? fallback : configured;
}

gateway::ClientPtr optional_client(const gateway::ClientRegistry& reg, const std::string& name) {
  return !name.empty() && reg.contains(name) ? reg.get(name) : nullptr;
}

std::vector<ContentSpec> benchmark_specs(const std::string& bench) {
  return bench.empty() ? load_shipped_benchmarks() : load_benchmark(bench);
}

std::map<std::string, ContentKind> shipped_kinds() {
  std::map<std::string, ContentKind> kinds;
  for (const auto& s : load_shipped_benchmarks()) kinds[s.id] = s.kind;
  return kinds;
}

std::vector<analysis::TrialRow> load_rows(const std::string& in, bool include_flagged) {
  const fs::path p(in);
  if (fs::is_regular_file(p)) return analysis::rows_from_jsonl(io::read_file(p));
  return analysis::rows_from_outcomes(analysis::load_outcomes(p), shipped_kinds(), include_flagged);
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string part;
  while (std::getline(in, part, ','))
    if (!part.empty()) out.push_back(part);
  return out;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Audio-visual web content generation and pairwise evaluation engine", "avr"};
  app.require_subcommand(1);
  Common common;
  int code = kOk;

  // bench list
  auto* bench = app.add_subcommand("bench", "Benchmark items")->require_subcommand(1);
  auto* bench_list = bench->add_subcommand("list", "Print the shipped benchmark items");
  std::string bench_file;
  bench_list->add_option("--bench", bench_file, "Benchmark file instead of the shipped ones");
  add_common(bench_list, common, false);
  bench_list->callback([&] {
    for (const auto& s : benchmark_specs(bench_file))
      out << s.id << "  " << to_string(s.kind) << "  " << to_string(s.difficulty) << "  " << s.title << "\n";
  });

  // assets index
  auto* assets = app.add_subcommand("assets", "Asset packs")->require_subcommand(1);
  auto* assets_index = assets->add_subcommand("index", "Index the packs under a directory");
  std::string asset_root;
  assets_index->add_option("root", asset_root, "Directory with one subdirectory per pack")->required();
  add_common(assets_index, common, false);
  assets_index->callback([&] {
    const auto index = assetbank::index_packs(asset_root, common.workers);
    const auto path = assetbank::save_index(index);
    for (const auto& p : index.packs) {
      out << p.name << ":";
      for (auto k : assetbank::kAllKinds) out << " " << to_string(k) << "=" << p.counts.at(k);
      out << "\n";
      for (const auto& a : p.assets)
        if (!a.warning.empty()) out << "  warning: " << a.rel_path << ": " << a.warning << "\n";
    }
    out << "index written to " << path.string() << "\n";
  });

  // agent run
  auto* agent_cmd = app.add_subcommand("agent", "Content generation")->require_subcommand(1);
  auto* agent_run = agent_cmd->add_subcommand("run", "Run or resume the generation pipeline for one item");
  std::string spec_id, run_out, agent_bench, agent_assets;
  std::optional<int> k_opt, iters_opt;
  std::optional<std::int64_t> seed_opt;
  agent_run->add_option("--spec", spec_id, "Benchmark item id")->required();
  agent_run->add_option("--out", run_out, "Run directory (default: runs/<spec>)");
  agent_run->add_option("--bench", agent_bench, "Benchmark file instead of the shipped ones");
  agent_run->add_option("--assets", agent_assets, "Asset pack root (indexed on demand)");
  agent_run->add_option("--k", k_opt, "Initial candidates (overrides run.k_initial)");
  agent_run->add_option("--iters", iters_opt, "Improvement iterations (overrides run.improve_iters)");
  agent_run->add_option("--seed", seed_opt, "Seed (overrides run.seed)");
  add_common(agent_run, common, true);
  agent_run->callback([&] {
    auto cfg = config_or_default(common);
    if (k_opt) cfg.run.k_initial = *k_opt;
    if (iters_opt) cfg.run.improve_iters = *iters_opt;
    if (seed_opt) cfg.run.seed = *seed_opt;
    cfg.run.coder_model = role(cfg.run.coder_model, "coder");
    cfg.run.omni_model = role(cfg.run.omni_model, "omni");
    const auto spec = find_spec(benchmark_specs(agent_bench), spec_id);
    if (!spec) throw ValidationError("unknown spec '" + spec_id + "' (see `avr bench list`)");
    auto reg = build_registry(cfg, common.mock);
    auto rec = build_recorder(cfg, common.mock);
    const auto coder = reg.get(cfg.run.coder_model);
    const auto omni = optional_client(reg, cfg.run.omni_model);
    const auto reviewer = optional_client(reg, cfg.run.reviewer_model);
    std::optional<assetbank::PackIndex> bank;
    if (cfg.run.with_assets) {
      const fs::path root = agent_assets.empty() ? cfg.experiment.asset_root : fs::path(agent_assets);
      if (root.empty()) throw ValidationError("with_assets needs --assets or experiment.asset_root");
      bank = fs::exists(root / assetbank::kIndexFile) ? assetbank::load_index(root)
                                                      : assetbank::index_packs(root, common.workers);
    }
    const fs::path dir = run_out.empty() ? fs::path("runs") / spec->id : fs::path(run_out);
    auto run = RunHandle::open(dir, cfg.run, *spec);
    auto mode = cfg.eval_mode;
    if (!reviewer) mode.review = false;
    agent::Clients clients{coder.get(), omni.get(), reviewer.get(), rec.get(), nullptr};
    const auto result = agent::run(*run, bank, clients, {common.workers, mode});
    out << "run: " << dir.string() << (run->resumed() ? " (resumed)" : "") << "\n";
    out << "recorder: " << rec->name() << "\n";
    out << "initial_version: " << version_stem(result.initial_version_id) << "\n";
    out << "final_version: " << version_stem(result.final_version_id) << " ("
        << (dir / "versions" / (version_stem(result.final_version_id) + ".html")).string() << ")\n";
    out << "iterations_used: " << result.iterations_used << "\n";
    out << "error_fix_steps_used: " << result.error_fix_steps_used << "\n";
    out << "terminated_reason: " << to_string(result.terminated_reason) << "\n";
    for (const auto& d : result.diagnostics) out << "diagnostic: " << d << "\n";
  });

  // eval compare / tournament
  auto* eval = app.add_subcommand("eval", "Pairwise evaluation")->require_subcommand(1);
  auto* eval_compare = eval->add_subcommand("compare", "Judge the final versions of two runs");
  std::string run_a, run_b, mode_token, eval_out;
  eval_compare->add_option("run_a", run_a, "Run directory shown as A")->required();
  eval_compare->add_option("run_b", run_b, "Run directory shown as B")->required();
  eval_compare->add_option("--mode", mode_token, "full or multiround/relative/review flags, e.g. 011");
  eval_compare->add_option("--out", eval_out, "Directory for transcripts and the comparison record (default: eval)");
  bool both_orders = false;
  eval_compare->add_flag("--duel", both_orders, "Judge both presentation orders");
  add_common(eval_compare, common, true);

  auto* eval_tournament = eval->add_subcommand("tournament", "Round-robin over a run's initial candidates");
  std::string tour_run;
  int tour_k = 0;
  eval_tournament->add_option("run", tour_run, "Run directory")->required();
  eval_tournament->add_option("--k", tour_k, "Number of candidates, taken in slot order")->required()->check(
      CLI::Range(2, 64));
  eval_tournament->add_option("--mode", mode_token, "full or multiround/relative/review flags");
  eval_tournament->add_option("--out", eval_out, "Directory for transcripts and records (default: <run>-tournament)");
  add_common(eval_tournament, common, true);

  auto judges_for = [&](EngineConfig& cfg, gateway::ClientRegistry& reg, evaluator::EvalMode& mode) {
    cfg.run.omni_model = role(cfg.run.omni_model, "omni");
    if (common.mock && mode.review) cfg.run.reviewer_model = role(cfg.run.reviewer_model, "reviewer");
    reg = build_registry(cfg, common.mock);
    const auto reviewer = optional_client(reg, cfg.run.reviewer_model);
    if (mode.review && !reviewer) throw ValidationError("mode " + mode.token() + " needs run.reviewer_model");
    return evaluator::Judges{reg.get(cfg.run.omni_model).get(), reviewer.get(), cfg.run.eval_temperature,
                             cfg.run.seed, nullptr};
  };

  eval_compare->callback([&] {
    auto cfg = config_or_default(common);
    auto mode = mode_token.empty() ? cfg.eval_mode : evaluator::parse_mode(mode_token);
    gateway::ClientRegistry reg;
    const auto judges = judges_for(cfg, reg, mode);
    auto rec = build_recorder(cfg, common.mock);
    const auto a = run_side(run_a, true, *rec, fs::path(run_a).filename().string());
    const auto b = run_side(run_b, true, *rec, fs::path(run_b).filename().string());
    if (!a || !b) throw ValidationError("both runs need a finished result with a recording");
    ContentSpec spec = RunHandle::open_existing(run_a)->spec();
    DirectorySink sink(eval_out.empty() ? fs::path("eval") : fs::path(eval_out));
    if (both_orders) {
      const auto d = evaluator::duel(a, b, spec, mode, judges, sink, "compare");
      out << a->content_id << " wins " << d.a_wins << ", " << b->content_id << " wins " << d.b_wins << "\n";
    } else {
      const auto r = evaluator::compare(*a, *b, spec, mode, judges, sink, "compare");
      out << "verdict: " << r.verdict << " (" << r.winner() << "), parse " << to_string(r.parse_status) << "\n";
    }
    out << "records in " << sink.root().string() << "\n";
  });

  eval_tournament->callback([&] {
    auto cfg = config_or_default(common);
    auto mode = mode_token.empty() ? cfg.eval_mode : evaluator::parse_mode(mode_token);
    gateway::ClientRegistry reg;
    const auto judges = judges_for(cfg, reg, mode);
    auto rec = build_recorder(cfg, common.mock);
    auto run = RunHandle::open_existing(tour_run);
    const auto cands = run->step_data("candidates");
    if (!cands) throw ValidationError(tour_run + " has no initial candidates");
    const auto& ids = cands->at("versions");
    if (static_cast<int>(ids.size()) < tour_k)
      throw ValidationError("run has " + std::to_string(ids.size()) + " candidates, fewer than --k");
    std::vector<std::optional<evaluator::Side>> sides;
    for (int i = 0; i < tour_k; ++i)
      sides.push_back(ids[static_cast<std::size_t>(i)].is_null()
                          ? std::nullopt
                          : version_side(*run, ids[static_cast<std::size_t>(i)].get<int>(), *rec));
    DirectorySink sink(eval_out.empty() ? fs::path(tour_run + "-tournament") : fs::path(eval_out));
    const auto res = evaluator::round_robin(
        static_cast<std::size_t>(tour_k),
        [&](std::size_t i, std::size_t j) {
          return evaluator::duel(sides[i], sides[j], run->spec(), mode, judges, sink,
                                 "duel-" + std::to_string(i) + "-" + std::to_string(j));
        },
        common.workers);
    sink.write("tournament.json", evaluator::to_json(res).dump(2) + "\n");
    out << "winner: candidate " << res.winner << "\n";
    for (std::size_t i = 0; i < res.totals.size(); ++i) out << "candidate " << i << ": " << res.totals[i] << " wins\n";
    for (const auto& t : res.trace) out << "trace: " << t << "\n";
  });

  // record
  auto* record = app.add_subcommand("record", "Record one HTML document");
  std::string html_file, record_out, recorder_kind;
  std::optional<double> duration;
  record->add_option("html_file", html_file, "Document to record")->required()->check(CLI::ExistingFile);
  record->add_option("--out", record_out, "Output directory (default: <file>.avr)");
  record->add_option("--recorder", recorder_kind, "simulated, browser or auto")
      ->check(CLI::IsMember({"simulated", "browser", "auto"}));
  record->add_option("--duration", duration, "Seconds to record");
  add_common(record, common, true);
  record->callback([&] {
    auto cfg = config_or_default(common);
    if (!recorder_kind.empty()) cfg.recorder.kind = recorder_kind;
    auto opts = cfg.run.record_opts;
    if (duration) opts.duration_s = *duration;
    validate(opts);
    auto rec = build_recorder(cfg, common.mock);
    const fs::path html(html_file);
    const fs::path dir = record_out.empty() ? fs::path(html_file + ".avr") : fs::path(record_out);
    fs::create_directories(dir);
    const auto result =
        rec->record({io::read_file(html), html.parent_path().empty() ? fs::path(".") : html.parent_path(),
                     dir / "recording.webm", opts});
    io::write_file_atomic(dir / "console.jsonl", result.log.to_jsonl());
    auto summary = recorder::to_json(result.recording, dir);
    summary["recorder"] = rec->name();
    summary["errors"] = result.log.error_count();
    summary["warnings"] = result.log.warn_count();
    summary["harness_warnings"] = result.warnings;
    io::write_file_atomic(dir / "recording.json", summary.dump(2) + "\n");
    out << summary.dump(2) << "\n";
  });

  // experiment plan / execute
  auto* experiment = app.add_subcommand("experiment", "Experiment plans")->require_subcommand(1);
  auto* exp_plan = experiment->add_subcommand("plan", "Count the comparisons of a dataset");
  std::string dataset_token;
  analysis::PlanSize plan_size;
  exp_plan->add_option("--dataset", dataset_token, "a, b or c")->required()->check(CLI::IsMember({"a", "b", "c"}));
  exp_plan->add_option("--contents", plan_size.n_contents, "Contents")->check(CLI::PositiveNumber);
  exp_plan->add_option("--models", plan_size.n_models, "Models")->check(CLI::PositiveNumber);
  exp_plan->add_option("--settings", plan_size.n_settings, "Settings")->check(CLI::PositiveNumber);
  add_common(exp_plan, common, false);
  exp_plan->callback([&] {
    const auto ds = analysis::parse_dataset(dataset_token);
    const auto tasks = analysis::enumerate_plan(ds, plan_size);
    out << tasks.size() << "\n" << plan_breakdown(ds, plan_size) << "\n";
  });

  auto* exp_exec = experiment->add_subcommand("execute", "Generate every arm and judge the dataset's comparisons");
  std::string exp_out;
  exp_exec->add_option("--dataset", dataset_token, "a, b or c")->required()->check(CLI::IsMember({"a", "b", "c"}));
  exp_exec->add_option("--out", exp_out, "Experiment directory (default: experiment)");
  add_common(exp_exec, common, true);
  exp_exec->callback([&] {
    const auto cfg = config_or_default(common);
    auto reg = build_registry(cfg, common.mock);
    auto rec = build_recorder(cfg, common.mock);
    const auto ds = analysis::parse_dataset(dataset_token);
    try {
      const auto s = execute_experiment(ds, cfg, reg, *rec, exp_out.empty() ? fs::path("experiment") : fs::path(exp_out),
                                        common.workers, err);
      out << "runs " << s.runs << ", comparisons " << s.comparisons << ", rows " << s.rows << "\n";
    } catch (const PartialFailure& e) {
      err << e.what() << "\n";
      code = kPartial;
    }
  });

  // analyze winrates / logit
  auto* analyze = app.add_subcommand("analyze", "Statistics over comparison records")->require_subcommand(1);
  std::string analyze_in, group_by = "assets,feedback,init_best";
  bool include_flagged = false;
  auto* an_win = analyze->add_subcommand("winrates", "Mean (sd) win rate per group over contents");
  an_win->add_option("--in", analyze_in, "Directory of comparison records, or a rows .jsonl file")->required();
  an_win->add_option("--group-by", group_by, "Comma-separated keys: assets, feedback, init_best, model, kind");
  an_win->add_flag("--include-flagged", include_flagged, "Keep verdicts that fell back to slot B");
  add_common(an_win, common, false);
  an_win->callback([&] {
    const auto rows = load_rows(analyze_in, include_flagged);
    out << analysis::render_winrates(analysis::winrate_table(rows, split_csv(group_by)));
  });

  auto* an_logit = analyze->add_subcommand("logit", "Logistic regression of wins on arm features");
  std::string baseline_model, baseline_kind = "game", fit_out;
  bool intercept_only = false;
  an_logit->add_option("--in", analyze_in, "Directory of comparison records, or a rows .jsonl file")->required();
  an_logit->add_option("--baseline-model", baseline_model, "Reference model (default: first by name)");
  an_logit->add_option("--baseline-kind", baseline_kind, "Reference content kind")
      ->check(CLI::IsMember({"game", "animation"}));
  an_logit->add_flag("--intercept-only", intercept_only, "Fit the bias-only model");
  an_logit->add_option("--out", fit_out, "Write the fit summary as JSON");
  an_logit->add_flag("--include-flagged", include_flagged, "Keep verdicts that fell back to slot B");
  add_common(an_logit, common, false);
  an_logit->callback([&] {
    const auto rows = load_rows(analyze_in, include_flagged);
    if (rows.empty()) throw ValidationError("no rows in " + analyze_in);
    analysis::LogitFit fit;
    if (intercept_only) {
      Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
      for (std::size_t i = 0; i < rows.size(); ++i) y(static_cast<Eigen::Index>(i)) = rows[i].win;
      fit = analysis::fit_logistic(Eigen::MatrixXd::Ones(y.size(), 1), y);
      fit.labels = {"intercept"};
    } else {
      std::string base = baseline_model;
      if (base.empty()) {
        base = rows.front().model;
        for (const auto& r : rows) base = std::min(base, r.model);
      }
      fit = analysis::fit_logistic(analysis::build_design(rows, base, parse_content_kind(baseline_kind)));
    }
    out << "rows: " << rows.size() << "\n" << analysis::render_fit(fit);
    if (!fit_out.empty()) io::write_file_atomic(fit_out, analysis::to_json(fit).dump(2) + "\n");
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n" << app.help();
    return kValidation;
  } catch (const PartialFailure& e) {
    err << "error: " << e.what() << "\n";
    return kPartial;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return code;
}

}  // namespace avr::cli
