#include <yaml-cpp/yaml.h>

#include "avr/agent/agent.hpp"
#include "avr/core/errors.hpp"
#include "avr/core/kvtree.hpp"
#include "avr/core/parallel.hpp"
#include "avr/gateway/extract.hpp"

namespace avr::agent {

std::string_view to_string(FeedbackSource source) {
  return source == FeedbackSource::omni_direct ? "omni_direct" : "omni_text";
}

std::string_view to_string(TerminatedReason reason) {
  switch (reason) {
    case TerminatedReason::iterations_exhausted:
      return "iterations_exhausted";
    case TerminatedReason::clean_logs:
      return "clean_logs";
    case TerminatedReason::budget_exhausted:
      return "budget_exhausted";
    case TerminatedReason::aborted:
      return "aborted";
  }
  return "?";
}

TerminatedReason parse_terminated_reason(std::string_view token) {
  for (auto r : {TerminatedReason::iterations_exhausted, TerminatedReason::clean_logs,
                 TerminatedReason::budget_exhausted, TerminatedReason::aborted})
    if (to_string(r) == token) return r;
  throw ValidationError("unknown terminated reason '" + std::string(token) + "'");
}

nlohmann::json to_json(const FeedbackReport& r, const fs::path& run_dir) {
  nlohmann::json j{{"description", r.description}, {"critique", r.critique}, {"source", to_string(r.source)}};
  if (r.source == FeedbackSource::omni_direct) j["recording"] = recorder::to_json(r.recording, run_dir);
  return j;
}

FeedbackReport feedback_from(const nlohmann::json& j, const fs::path& run_dir) {
  FeedbackReport r;
  r.description = j.value("description", std::string());
  r.critique = j.value("critique", std::string());
  r.source = j.value("source", std::string("omni_text")) == "omni_direct" ? FeedbackSource::omni_direct
                                                                          : FeedbackSource::omni_text;
  if (j.contains("recording")) r.recording = recorder::recording_from(j.at("recording"), run_dir);
  return r;
}

nlohmann::json to_json(const RunResult& r) {
  return {{"final_version_id", r.final_version_id},
          {"initial_version_id", r.initial_version_id},
          {"iterations_used", r.iterations_used},
          {"error_fix_steps_used", r.error_fix_steps_used},
          {"terminated_reason", to_string(r.terminated_reason)},
          {"skipped_iterations", r.skipped_iterations},
          {"degraded_iterations", r.degraded_iterations},
          {"diagnostics", r.diagnostics}};
}

RunResult run_result_from(const nlohmann::json& j) {
  RunResult r;
  r.final_version_id = j.at("final_version_id").get<int>();
  r.initial_version_id = j.at("initial_version_id").get<int>();
  r.iterations_used = j.at("iterations_used").get<int>();
  r.error_fix_steps_used = j.at("error_fix_steps_used").get<int>();
  r.terminated_reason = parse_terminated_reason(j.at("terminated_reason").get<std::string>());
  r.skipped_iterations = j.value("skipped_iterations", std::vector<int>{});
  r.degraded_iterations = j.value("degraded_iterations", std::vector<int>{});
  r.diagnostics = j.value("diagnostics", std::vector<std::string>{});
  return r;
}

std::string render_result(const RunResult& r) {
  YAML::Node n;
  n["schema"] = kv::kSchemaVersion;
  n["final_version_id"] = r.final_version_id;
  n["initial_version_id"] = r.initial_version_id;
  n["iterations_used"] = r.iterations_used;
  n["error_fix_steps_used"] = r.error_fix_steps_used;
  n["terminated_reason"] = std::string(to_string(r.terminated_reason));
  n["skipped_iterations"] = YAML::Node(YAML::NodeType::Sequence);
  for (int i : r.skipped_iterations) n["skipped_iterations"].push_back(i);
  n["degraded_iterations"] = YAML::Node(YAML::NodeType::Sequence);
  for (int i : r.degraded_iterations) n["degraded_iterations"].push_back(i);
  n["diagnostics"] = YAML::Node(YAML::NodeType::Sequence);
  for (const auto& d : r.diagnostics) n["diagnostics"].push_back(d);
  return kv::emit(n);
}

RunResult parse_result(const std::string& text, const std::string& source_name) {
  const auto n = kv::parse(text, source_name);
  kv::check_schema(n, source_name);
  RunResult r;
  r.final_version_id = n["final_version_id"].as<int>();
  r.initial_version_id = n["initial_version_id"].as<int>();
  r.iterations_used = n["iterations_used"].as<int>();
  r.error_fix_steps_used = n["error_fix_steps_used"].as<int>();
  r.terminated_reason = parse_terminated_reason(kv::require_string(n, "terminated_reason", source_name));
  for (const auto& x : n["skipped_iterations"]) r.skipped_iterations.push_back(x.as<int>());
  for (const auto& x : n["degraded_iterations"]) r.degraded_iterations.push_back(x.as<int>());
  for (const auto& x : n["diagnostics"]) r.diagnostics.push_back(x.as<std::string>());
  return r;
}

void validate_setup(const RunConfig& config, const Clients& clients) {
  validate(config);
  if (!clients.coder) throw ValidationError("no coder model configured");
  if (!clients.recorder) throw ValidationError("no recorder configured");
  const bool needs_omni = config.k_initial > 1 || config.with_feedback;
  if (needs_omni && !clients.omni) throw ValidationError("an omni model is required for k > 1 or feedback");
  if (needs_omni && clients.omni->capability() != gateway::Capability::omni)
    throw ValidationError("model '" + clients.omni->name() + "' is text_only and cannot judge recordings");
  if (config.omni_direct && clients.coder->capability() != gateway::Capability::omni)
    throw ValidationError("omni_direct needs an omni-capable coder; '" + clients.coder->name() + "' is text_only");
}

namespace {

// One coder call plus one retry when no document can be extracted.
std::optional<std::string> ask_for_document(gateway::ModelClient& coder, const gateway::ChatRequest& req,
                                            ArtifactSink& sink, const std::string& label, gateway::Clock* clock,
                                            std::vector<std::string>& errors) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    const auto tag = attempt == 0 ? label : label + "-retry";
    try {
      const auto reply = gateway::chat(coder, req, {&sink, tag, clock, {}});
      return gateway::extract_code(reply.text);
    } catch (const gateway::ExtractionError& e) {
      errors.push_back(tag + ": " + e.what());
    } catch (const gateway::TokenLimitError& e) {
      errors.push_back(tag + ": " + e.what());
    } catch (const gateway::RetryExhausted& e) {
      errors.push_back(tag + ": " + e.what());
    }
  }
  return std::nullopt;
}

}  // namespace

std::vector<Candidate> generate_initial(const ContentSpec& spec, const RunConfig& config,
                                        const std::optional<std::string>& asset_tree, gateway::ModelClient& coder,
                                        StepTx& tx, gateway::Clock* clock, std::size_t workers) {
  if (config.k_initial < 1) throw ValidationError("k_initial must be at least 1");
  const auto k = static_cast<std::size_t>(config.k_initial);
  const auto prompt = generation_prompt(spec, asset_tree);
  std::vector<std::optional<std::string>> sources(k);
  std::vector<Candidate> out(k);
  parallel_for(k, workers, [&](std::size_t i) {
    gateway::ChatRequest req{{gateway::Message::user(prompt)}, config.gen_temperature,
                             config.seed + static_cast<std::int64_t>(i)};
    sources[i] = ask_for_document(coder, req, tx, "candidate-" + std::to_string(i), clock, out[i].errors);
  });
  for (std::size_t i = 0; i < k; ++i)
    if (sources[i])
      out[i].version = tx.add_version(VersionStage::initial_candidate, 0, std::nullopt, coder.name(), *sources[i]);
  return out;
}

std::optional<ContentVersion> improve_step(const ContentVersion& current, const ContentSpec& spec,
                                           const RunConfig& config, const std::optional<std::string>& asset_tree,
                                           const std::optional<FeedbackReport>& feedback,
                                           const recorder::ConsoleLog& log, gateway::ModelClient& coder, StepTx& tx,
                                           VersionStage stage, int iteration, const std::string& label,
                                           gateway::Clock* clock) {
  auto msg = gateway::Message::user(improve_prompt(spec, asset_tree, current.source, log, feedback, iteration));
  if (feedback && feedback->source == FeedbackSource::omni_direct)
    for (auto& p : gateway::media_parts(feedback->recording.media_path, "", std::nullopt))
      msg.parts.push_back(std::move(p));
  gateway::ChatRequest req{{std::move(msg)}, config.improve_temperature, config.seed};
  std::vector<std::string> errors;
  const auto source = ask_for_document(coder, req, tx, label, clock, errors);
  if (!source) return std::nullopt;
  return tx.add_version(stage, iteration, current.version_id, coder.name(), *source);
}

std::optional<FeedbackReport> make_feedback(const recorder::StoredRecording& stored, const ContentSpec& spec,
                                            const RunConfig& config, gateway::ModelClient* omni, ArtifactSink& sink,
                                            const std::string& label, gateway::Clock* clock) {
  if (config.omni_direct) {
    FeedbackReport r;
    r.source = FeedbackSource::omni_direct;
    r.recording = stored.recording;
    return r;
  }
  if (!omni) return std::nullopt;
  const gateway::JudgeHint hint{stored.recording.audio_rms, stored.recording.frame_variance,
                                stored.log.error_count()};
  auto first = gateway::Message::user(feedback_describe_prompt(spec));
  for (auto& p : gateway::media_parts(stored.recording.media_path, "content", hint)) first.parts.push_back(std::move(p));
  std::vector<gateway::Message> convo{std::move(first)};
  try {
    FeedbackReport r;
    r.description = gateway::chat(*omni, {convo, config.eval_temperature, config.seed}, {&sink, label + "-describe", clock, {}}).text;
    convo.push_back(gateway::Message::assistant(r.description));
    convo.push_back(gateway::Message::user(feedback_critique_prompt(spec)));
    r.critique = gateway::chat(*omni, {convo, config.eval_temperature, config.seed}, {&sink, label + "-critique", clock, {}}).text;
    return r;
  } catch (const RuntimeFailure&) {
    return std::nullopt;
  }
}

std::vector<int> lineage(const RunHandle& run, int version_id) {
  std::vector<int> chain;
  std::optional<int> id = version_id;
  while (id) {
    const auto v = run.version(*id);
    if (!v) throw ValidationError("version " + version_stem(*id) + " is not in the run");
    chain.push_back(v->version_id);
    if (chain.size() > 100000) throw ValidationError("version lineage has a cycle");
    id = v->parent;
  }
  return chain;
}

}  // namespace avr::agent
