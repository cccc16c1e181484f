#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "avr/assetbank/assetbank.hpp"
#include "avr/core/run_handle.hpp"
#include "avr/core/types.hpp"
#include "avr/evaluator/evaluator.hpp"
#include "avr/gateway/client.hpp"
#include "avr/recorder/recorder.hpp"
#include "avr/recorder/run_io.hpp"

namespace avr::agent {

struct GuidelineSet {
  std::vector<std::string> base;
  std::vector<std::string> kind_specific;

  /// "- line" per instruction, base first, with {content-type} expanded.
  std::string render(ContentKind kind) const;
};

GuidelineSet build_guidelines(ContentKind kind);
GuidelineSet build_guidelines(std::string_view kind_token);

enum class FeedbackSource { omni_text, omni_direct };
std::string_view to_string(FeedbackSource source);

struct FeedbackReport {
  std::string description;
  std::string critique;
  FeedbackSource source = FeedbackSource::omni_text;
  /// Set for omni_direct: the recording handed to the coder.
  recorder::AVRecording recording;
};

nlohmann::json to_json(const FeedbackReport& report, const fs::path& run_dir = {});
FeedbackReport feedback_from(const nlohmann::json& j, const fs::path& run_dir = {});

enum class TerminatedReason { iterations_exhausted, clean_logs, budget_exhausted, aborted };
std::string_view to_string(TerminatedReason reason);
TerminatedReason parse_terminated_reason(std::string_view token);

struct RunResult {
  int final_version_id = 0;
  /// Best-of-k pick (the winning initial candidate).
  int initial_version_id = 0;
  int iterations_used = 0;
  int error_fix_steps_used = 0;
  TerminatedReason terminated_reason = TerminatedReason::iterations_exhausted;
  std::vector<int> skipped_iterations;
  std::vector<int> degraded_iterations;
  std::vector<std::string> diagnostics;
};

nlohmann::json to_json(const RunResult& result);
RunResult run_result_from(const nlohmann::json& j);
/// Key-value tree text written to `result`.
std::string render_result(const RunResult& result);
RunResult parse_result(const std::string& text, const std::string& source_name);

/// Error and warning lines only, newest `cap` kept, oldest first.
std::string log_digest(const recorder::ConsoleLog& log, std::size_t cap = 200);

/// Description, criteria and guidelines, plus the asset tree when given.
std::string base_prompt(const ContentSpec& spec, const std::optional<std::string>& asset_tree);
std::string generation_prompt(const ContentSpec& spec, const std::optional<std::string>& asset_tree);
std::string improve_prompt(const ContentSpec& spec, const std::optional<std::string>& asset_tree,
                           const std::string& current_source, const recorder::ConsoleLog& log,
                           const std::optional<FeedbackReport>& feedback, int iteration);
std::string feedback_describe_prompt(const ContentSpec& spec);
std::string feedback_critique_prompt(const ContentSpec& spec);

struct Clients {
  gateway::ModelClient* coder = nullptr;
  gateway::ModelClient* omni = nullptr;
  /// Optional; without it the tournament skips the review round.
  gateway::ModelClient* reviewer = nullptr;
  recorder::Recorder* recorder = nullptr;
  gateway::Clock* clock = nullptr;
};

struct AgentOptions {
  std::size_t workers = 1;
  /// Empty: 111 with a reviewer, 110 without.
  std::optional<evaluator::EvalMode> eval_mode;
};

/// Capability and presence checks done before any step runs.
void validate_setup(const RunConfig& config, const Clients& clients);

struct Candidate {
  std::optional<ContentVersion> version;
  std::vector<std::string> errors;
};

/// k coder calls; a reply without a document is regenerated once, then the
/// slot stays empty. Versions are added to `tx` in slot order.
std::vector<Candidate> generate_initial(const ContentSpec& spec, const RunConfig& config,
                                        const std::optional<std::string>& asset_tree, gateway::ModelClient& coder,
                                        StepTx& tx, gateway::Clock* clock, std::size_t workers = 1);

/// New version with parent = current, or nullopt when both attempts fail to
/// yield a document.
std::optional<ContentVersion> improve_step(const ContentVersion& current, const ContentSpec& spec,
                                           const RunConfig& config, const std::optional<std::string>& asset_tree,
                                           const std::optional<FeedbackReport>& feedback,
                                           const recorder::ConsoleLog& log, gateway::ModelClient& coder, StepTx& tx,
                                           VersionStage stage, int iteration, const std::string& label,
                                           gateway::Clock* clock);

/// Describe then critique in one omni conversation, or an omni_direct marker.
/// Nullopt when the omni model fails.
std::optional<FeedbackReport> make_feedback(const recorder::StoredRecording& stored, const ContentSpec& spec,
                                            const RunConfig& config, gateway::ModelClient* omni, ArtifactSink& sink,
                                            const std::string& label, gateway::Clock* clock);

/// Runs or resumes the three stages in `run`. `bank` is required when
/// config.with_assets is set.
RunResult run(RunHandle& run, const std::optional<assetbank::PackIndex>& bank, const Clients& clients,
              const AgentOptions& options = {});

/// Walks parent links from `version_id` to its initial candidate.
std::vector<int> lineage(const RunHandle& run, int version_id);

}  // namespace avr::agent
