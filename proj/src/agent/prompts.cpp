#include "avr/agent/agent.hpp"
#include "avr/core/criteria.hpp"

namespace avr::agent {

std::string log_digest(const recorder::ConsoleLog& log, std::size_t cap) {
  std::vector<const recorder::LogEntry*> keep;
  for (const auto& e : log.entries)
    if (e.level != recorder::LogLevel::log) keep.push_back(&e);
  const auto skip = keep.size() > cap ? keep.size() - cap : 0;
  std::string out;
  for (std::size_t i = skip; i < keep.size(); ++i) {
    const auto& e = *keep[i];
    out += "[" + std::string(to_string(e.level));
    if (e.source == recorder::LogSource::unhandled_exception) out += ", uncaught";
    out += " t=" + std::to_string(e.t_ms) + "ms] " + e.message + "\n";
  }
  return out;
}

std::string base_prompt(const ContentSpec& spec, const std::optional<std::string>& asset_tree) {
  const std::string word(content_type_word(spec.kind));
  std::string p = "Content id: " + spec.id + "\n";
  p += "Content type: " + word + "\n";
  p += "Description: " + spec.full_description() + "\n\n";
  p += "The " + word + " will be judged on these criteria:\n" + render_criteria(spec) + "\n";
  p += "The " + word + " must follow these guidelines:\n" + build_guidelines(spec.kind).render(spec.kind);
  if (asset_tree) {
    p += "\nThese assets are available next to the HTML file; reference them by these relative paths:\n";
    p += *asset_tree;
  }
  return p;
}

std::string generation_prompt(const ContentSpec& spec, const std::optional<std::string>& asset_tree) {
  const std::string word(content_type_word(spec.kind));
  return "Write a " + word + " as a single self-contained HTML document.\n\n" + base_prompt(spec, asset_tree) +
         "\nReply with the complete document in one ```html code block.\n";
}

std::string improve_prompt(const ContentSpec& spec, const std::optional<std::string>& asset_tree,
                           const std::string& current_source, const recorder::ConsoleLog& log,
                           const std::optional<FeedbackReport>& feedback, int iteration) {
  const std::string word(content_type_word(spec.kind));
  std::string p = "Improve this " + word + ". Fix every error, then make it better against the criteria.\n";
  p += "Iteration: " + std::to_string(iteration) + "\n\n";
  p += base_prompt(spec, asset_tree);
  p += "\n# Current code\n```html\n" + current_source;
  if (!current_source.empty() && current_source.back() != '\n') p += "\n";
  p += "```\n\n# Console log (errors and warnings)\n";
  const auto digest = log_digest(log);
  p += digest.empty() ? "No errors or warnings.\n" : digest;
  if (feedback) {
    p += "\n# AVR Feedback\n";
    if (feedback->source == FeedbackSource::omni_direct) {
      p += "The video and audio recording of the current code is attached.\n";
    } else {
      p += "## Description\n" + feedback->description + "\n\n## Critique\n" + feedback->critique + "\n";
    }
  }
  p += "\nReply with the complete improved document in one ```html code block.\n";
  return p;
}

std::string feedback_describe_prompt(const ContentSpec& spec) {
  const std::string word(content_type_word(spec.kind));
  return "The attached video and audio are a recording of a " + word + " meant to be: " + spec.full_description() +
         "\nDescribe what is shown and heard in detail: layout, motion, sounds, and anything that looks broken.\n";
}

std::string feedback_critique_prompt(const ContentSpec& spec) {
  return "Now give subjective feedback on the " + std::string(content_type_word(spec.kind)) +
         " for each of these criteria, with concrete suggestions:\n" + render_criteria(spec);
}

}  // namespace avr::agent
