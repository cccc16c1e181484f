#include <spdlog/spdlog.h>

#include "avr/agent/agent.hpp"
#include "avr/core/errors.hpp"
#include "avr/core/parallel.hpp"

namespace avr::agent {

namespace {

using nlohmann::json;
using recorder::StoredRecording;

std::string record_step(int version_id) { return "record/" + version_stem(version_id); }

json recorded_data(const StoredRecording& stored, const fs::path& run_dir) {
  return recorder::to_step_data(stored, run_dir);
}

class Pipeline {
 public:
  Pipeline(RunHandle& run, const std::optional<assetbank::PackIndex>& bank, const Clients& clients,
           const AgentOptions& options)
      : run_(run), bank_(bank), clients_(clients), options_(options), config_(run.config()), spec_(run.spec()) {}

  RunResult execute() {
    if (const auto done = run_.step_data("result")) return run_result_from(*done);
    validate_setup(config_, clients_);
    try {
      stage_assets();
      const int initial = stage_initial();
      result_.initial_version_id = initial;
      stage_improve(best_initial(initial));
    } catch (const ValidationError&) {
      throw;
    } catch (const Error& e) {
      if (run_.step_done("result")) throw;
      abort(e.what());
    }
    auto tx = run_.begin_step("result");
    tx.write(RunHandle::kResult, render_result(result_));
    run_.commit(tx, to_json(result_));
    return result_;
  }

 private:
  [[noreturn]] void abort(const std::string& why) {
    result_.terminated_reason = TerminatedReason::aborted;
    result_.diagnostics.push_back(why);
    auto tx = run_.begin_step("abort");
    tx.write(fs::path("abort"), render_result(result_));
    run_.commit(tx, to_json(result_));
    throw PartialFailure("run stopped: " + why + " (resume with the same command)");
  }

  void stage_assets() {
    if (!config_.with_assets) return;
    if (!bank_) throw ValidationError("with_assets is set but no asset index was given");
    if (!run_.step_done("assets")) {
      auto tx = run_.begin_step("assets");
      auto& coder = *clients_.coder;
      const auto choice = assetbank::select_packs(spec_, *bank_, coder, {&tx, "assets-packs", clients_.clock, {}},
                                                  config_.gen_temperature, config_.seed);
      const auto sel = assetbank::select_assets(spec_, *bank_, choice.packs, coder,
                                                {&tx, "assets-select", clients_.clock, {}}, tx,
                                                config_.gen_temperature, config_.seed);
      json entries = json::array();
      for (const auto& e : sel.entries) entries.push_back(e.pack_name + "/" + e.rel_path);
      run_.commit(tx, {{"packs", choice.packs},
                       {"fallback", choice.fallback},
                       {"warnings", choice.warnings},
                       {"entries", entries},
                       {"tree", sel.tree_text}});
    }
    tree_ = run_.step_data("assets")->at("tree").get<std::string>();
  }

  int stage_initial() {
    if (!run_.step_done("candidates")) {
      auto tx = run_.begin_step("candidates");
      const auto cands =
          generate_initial(spec_, config_, tree_, *clients_.coder, tx, clients_.clock, options_.workers);
      json ids = json::array();
      json errors = json::array();
      for (const auto& c : cands) {
        ids.push_back(c.version ? json(c.version->version_id) : json(nullptr));
        errors.push_back(c.errors);
      }
      run_.commit(tx, {{"versions", ids}, {"errors", errors}});
    }
    const auto data = *run_.step_data("candidates");
    std::vector<std::optional<int>> slots;
    for (const auto& id : data.at("versions")) slots.push_back(id.is_null() ? std::nullopt : std::optional<int>(id.get<int>()));
    if (std::none_of(slots.begin(), slots.end(), [](const auto& s) { return s.has_value(); })) {
      std::string why = "no initial candidate produced a document";
      for (const auto& errs : data.at("errors"))
        for (const auto& e : errs) why += "; " + e.get<std::string>();
      result_.terminated_reason = TerminatedReason::aborted;
      result_.diagnostics.push_back(why);
      auto tx = run_.begin_step("result");
      tx.write(RunHandle::kResult, render_result(result_));
      run_.commit(tx, to_json(result_));
      throw RuntimeFailure(why);
    }
    if (slots.size() == 1) return *slots.front();

    record_all(slots);
    if (!run_.step_done("tournament")) {
      auto tx = run_.begin_step("tournament");
      std::vector<std::optional<evaluator::Side>> sides;
      for (const auto& s : slots) {
        std::optional<StoredRecording> rec;
        if (s) rec = recording_of(*s);
        if (rec)
          sides.push_back(evaluator::Side{version_stem(*s), rec->recording, rec->log.error_count()});
        else
          sides.push_back(std::nullopt);
      }
      const auto mode = options_.eval_mode.value_or(
          evaluator::EvalMode{true, true, clients_.reviewer != nullptr});
      const evaluator::Judges judges{clients_.omni, clients_.reviewer, config_.eval_temperature, config_.seed,
                                     clients_.clock};
      const auto res = evaluator::round_robin(
          slots.size(),
          [&](std::size_t i, std::size_t j) {
            return evaluator::duel(sides[i], sides[j], spec_, mode, judges, tx,
                                   "duel-" + std::to_string(i) + "-" + std::to_string(j));
          },
          options_.workers);
      const auto j = evaluator::to_json(res);
      tx.write("tournament.json", j.dump(2) + "\n");
      run_.commit(tx, j);
    }
    const auto winner = run_.step_data("tournament")->at("winner").get<std::size_t>();
    if (!slots.at(winner)) throw RuntimeFailure("tournament picked a failed candidate");
    return *slots[winner];
  }

  int best_initial(int winner_id) {
    if (!run_.step_done("best_initial")) {
      auto tx = run_.begin_step("best_initial");
      const auto winner = run_.version(winner_id);
      const auto v = tx.add_version(VersionStage::best_initial, 0, winner_id, "tournament", winner->source);
      run_.commit(tx, {{"winner", winner_id}, {"version", v.version_id}});
    }
    return run_.step_data("best_initial")->at("version").get<int>();
  }

  // Versions with the same source share a recording: best_initial reuses its parent's.
  int recorded_id(int version_id) const {
    const auto v = run_.version(version_id);
    if (v && v->stage == VersionStage::best_initial && v->parent) return *v->parent;
    return version_id;
  }

  void record_all(const std::vector<std::optional<int>>& slots) {
    std::vector<int> todo;
    for (const auto& s : slots)
      if (s && !run_.step_done(record_step(*s))) todo.push_back(*s);
    std::vector<StepTx> txs;
    for (int id : todo) txs.push_back(run_.begin_step(record_step(id)));
    std::vector<json> data(todo.size());
    parallel_for(todo.size(), options_.workers, [&](std::size_t n) { data[n] = record_now(txs[n], todo[n]); });
    for (std::size_t n = 0; n < todo.size(); ++n) run_.commit(txs[n], data[n]);
  }

  json record_now(StepTx& tx, int id) {
    const auto v = run_.version(id);
    try {
      return recorded_data(recorder::record_into(*clients_.recorder, tx, *v, config_.record_opts), run_.dir());
    } catch (const Error& e) {
      spdlog::warn("recording {} failed: {}", version_stem(id), e.what());
      return {{"failed", true}, {"error", e.what()}};
    }
  }

  std::optional<StoredRecording> recording_of(int version_id) {
    const int id = recorded_id(version_id);
    const auto name = record_step(id);
    if (!run_.step_done(name)) {
      auto tx = run_.begin_step(name);
      const auto data = record_now(tx, id);
      run_.commit(tx, data);
    }
    const auto data = *run_.step_data(name);
    if (data.value("failed", false)) return std::nullopt;
    return recorder::load_stored(data, run_.dir());
  }

  void stage_improve(int current) {
    result_.final_version_id = current;
    for (int it = 1; it <= config_.improve_iters; ++it) {
      const auto name = "improve/" + std::to_string(it);
      if (!run_.step_done(name)) {
        const auto stored = recording_of(current);
        std::optional<FeedbackReport> feedback;
        if (config_.with_feedback) feedback = feedback_step("feedback/" + std::to_string(it), stored, it);
        run_step(name, current, stored, feedback, VersionStage::improved, it, "improve-" + std::to_string(it));
      }
      const auto data = *run_.step_data(name);
      ++result_.iterations_used;
      if (data.at("version").is_null())
        result_.skipped_iterations.push_back(it);
      else
        current = data.at("version").get<int>();
      if (data.value("degraded", false)) result_.degraded_iterations.push_back(it);
    }

    int fixes = 0;
    for (;;) {
      const auto stored = recording_of(current);
      const int errors = stored ? stored->log.error_count() : 0;
      if (!stored) result_.diagnostics.push_back("final recording of " + version_stem(current) + " failed");
      if (errors == 0) {
        result_.terminated_reason = fixes > 0 ? TerminatedReason::clean_logs : TerminatedReason::iterations_exhausted;
        break;
      }
      if (fixes == config_.error_fix_budget) {
        result_.terminated_reason = TerminatedReason::budget_exhausted;
        break;
      }
      ++fixes;
      const auto name = "errorfix/" + std::to_string(fixes);
      if (!run_.step_done(name))
        run_step(name, current, stored, std::nullopt, VersionStage::error_fix, config_.improve_iters + fixes,
                 "errorfix-" + std::to_string(fixes));
      const auto data = *run_.step_data(name);
      if (!data.at("version").is_null()) current = data.at("version").get<int>();
    }
    result_.error_fix_steps_used = fixes;
    result_.final_version_id = current;
  }

  std::optional<FeedbackReport> feedback_step(const std::string& name, const std::optional<StoredRecording>& stored,
                                              int it) {
    if (!run_.step_done(name)) {
      auto tx = run_.begin_step(name);
      std::optional<FeedbackReport> report;
      if (stored)
        report = make_feedback(*stored, spec_, config_, clients_.omni, tx, "feedback-" + std::to_string(it),
                               clients_.clock);
      run_.commit(tx, report ? json{{"degraded", false}, {"report", to_json(*report, run_.dir())}}
                             : json{{"degraded", true}});
    }
    const auto data = *run_.step_data(name);
    if (data.value("degraded", false)) return std::nullopt;
    return feedback_from(data.at("report"), run_.dir());
  }

  void run_step(const std::string& name, int current, const std::optional<StoredRecording>& stored,
                const std::optional<FeedbackReport>& feedback, VersionStage stage, int iteration,
                const std::string& label) {
    auto tx = run_.begin_step(name);
    const auto cur = *run_.version(current);
    const recorder::ConsoleLog log = stored ? stored->log : recorder::ConsoleLog{};
    const auto next = improve_step(cur, spec_, config_, tree_, feedback, log, *clients_.coder, tx, stage, iteration,
                                   label, clients_.clock);
    const bool degraded = config_.with_feedback && stage == VersionStage::improved && !feedback;
    run_.commit(tx, {{"version", next ? json(next->version_id) : json(nullptr)},
                     {"parent", current},
                     {"degraded", degraded}});
  }

  RunHandle& run_;
  const std::optional<assetbank::PackIndex>& bank_;
  const Clients& clients_;
  const AgentOptions& options_;
  const RunConfig& config_;
  const ContentSpec& spec_;
  std::optional<std::string> tree_;
  RunResult result_;
};

}  // namespace

RunResult run(RunHandle& run, const std::optional<assetbank::PackIndex>& bank, const Clients& clients,
              const AgentOptions& options) {
  return Pipeline(run, bank, clients, options).execute();
}

}  // namespace avr::agent
