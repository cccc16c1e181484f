#pragma once

#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "avr/gateway/client.hpp"

namespace avr::gateway {

enum class MockKind { scripted, heuristic_judge, template_coder };

MockKind parse_mock_kind(std::string_view token);
std::string_view to_string(MockKind kind);

/// Builds a mock client. Params per kind:
///   scripted:        name, capability, replies[], by_hash{hash: reply}, default, fail_first
///   heuristic_judge: name
///   template_coder:  name, variants[], inject_error, improve_variant
ClientPtr make_mock(MockKind kind, const nlohmann::json& params = nlohmann::json::object());
ClientPtr make_mock(std::string_view kind, const nlohmann::json& params = nlohmann::json::object());

/// Hash of the role-tagged text of every message; keys scripted by_hash maps.
std::string prompt_hash(const ChatRequest& request);

/// Replays replies by prompt hash first, then by call order.
class ScriptedClient final : public ModelClient {
 public:
  ScriptedClient(std::string name, Capability capability, std::vector<std::string> replies,
                 std::map<std::string, std::string> by_hash = {}, std::optional<std::string> fallback = {},
                 int fail_first = 0);

  std::string complete(const ChatRequest& request) override;
  std::size_t calls() const;
  std::vector<ChatRequest> requests() const;

 private:
  mutable std::mutex mu_;
  std::deque<std::string> queue_;
  std::map<std::string, std::string> by_hash_;
  std::optional<std::string> fallback_;
  int fail_remaining_;
  std::vector<ChatRequest> seen_;
};

/// Answers through a callable. Handy for judge tables in tests.
class FunctionClient final : public ModelClient {
 public:
  using Fn = std::function<std::string(const ChatRequest&)>;
  FunctionClient(std::string name, Capability capability, Fn fn);
  std::string complete(const ChatRequest& request) override;
  std::size_t calls() const;

 private:
  Fn fn_;
  mutable std::mutex mu_;
  std::size_t calls_ = 0;
};

/// `[stats label=A audio_rms=.. frame_variance=.. console_errors=..]`
std::string format_stats_tag(std::string_view label, const JudgeHint& hint);
/// Every stats tag in `text`; the first tag per label wins.
std::map<std::string, JudgeHint> parse_stats_tags(std::string_view text);

/// Ordering used by the heuristic judge: true when `a` is preferred over `b`
/// (higher audio_rms + frame_variance, then fewer console errors, then a).
bool heuristic_prefers(const JudgeHint& a, const JudgeHint& b);

/// Omni judge deciding from the JudgeHint stats attached to media parts or
/// echoed as stats tags in earlier text.
class HeuristicJudge final : public ModelClient {
 public:
  explicit HeuristicJudge(std::string name = "heuristic_judge");
  std::string complete(const ChatRequest& request) override;
};

/// Coder producing single-file documents from built-in templates. Initial
/// generations pick variants[seed mod n]; improvements use improve_variant.
/// Reads `Content id:`, `Content type:` and `Description:` lines from the prompt.
class TemplateCoder final : public ModelClient {
 public:
  struct Options {
    std::vector<std::string> variants{"calm", "error", "lively"};
    std::string improve_variant = "lively";
    bool inject_error = false;
  };
  explicit TemplateCoder(std::string name = "template_coder");
  TemplateCoder(std::string name, Options options);
  std::string complete(const ChatRequest& request) override;

 private:
  Options options_;
};

/// Renders one template variant: lively, calm or error.
std::string render_template(std::string_view variant, std::string_view content_id, std::string_view kind,
                            std::string_view description, int revision);

}  // namespace avr::gateway
