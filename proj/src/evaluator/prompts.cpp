#include "avr/core/criteria.hpp"
#include "avr/evaluator/evaluator.hpp"

namespace avr::evaluator::prompts {

namespace {

std::string what(const ContentSpec& spec) {
  return std::string(content_type_word(spec.kind)) + " meant to be: " + spec.full_description();
}

const char* kFinalRule =
    "A tie is not allowed; you must pick one. Explain briefly, then end with a line of the form\n"
    "FINAL: A\n"
    "or\n"
    "FINAL: B\n";

}  // namespace

std::string criteria_block(const ContentSpec& spec) {
  return "Evaluation criteria:\n" + render_criteria(spec);
}

std::string describe(const ContentSpec& spec, char label) {
  return std::string("The attached video and audio are a recording of content ") + label + ", a " + what(spec) +
         "\n\n" + criteria_block(spec) + "\nDescribe content " + label +
         " in detail: what is shown, how things move, what can be heard, and anything that looks or sounds broken.\n";
}

std::string decide(const ContentSpec& spec) {
  return "Based on the criteria, which content is better overall, A or B?\n" + std::string(kFinalRule);
}

std::string single(const ContentSpec& spec) {
  return "Content A and content B are two attempts at a " + what(spec) +
         "\nThe recording of A (video, then audio) comes first, followed by the recording of B.\n\n" +
         criteria_block(spec) + "\nWhich content is better overall, A or B?\n" + kFinalRule;
}

std::string independent(const ContentSpec& spec, char label) {
  return "The attached video and audio are a recording of a " + what(spec) + "\n\n" + criteria_block(spec) +
         "\nEvaluate this content against each criterion in turn and point out anything broken.\n";
}

std::string review(const ContentSpec& spec, const std::vector<Round>& omni, bool relative) {
  std::string p = "Another model watched and listened to recordings of two attempts, A and B, at a " + what(spec) +
                  "\nIts notes follow. Review them critically and decide which content is truly better.\n\n" +
                  criteria_block(spec) + "\n";
  if (!relative && omni.size() >= 2) {
    p += "## Evaluation of content A\n" + omni[0].reply + "\n\n## Evaluation of content B\n" + omni[1].reply + "\n\n";
  } else if (omni.size() >= 3) {
    p += "## Description of content A\n" + omni[0].reply + "\n\n## Description of content B\n" + omni[1].reply +
         "\n\n## Comparison\n" + omni[2].reply + "\n\n";
  } else {
    for (const auto& r : omni) p += "## Comparison\n" + r.reply + "\n\n";
  }
  return p + kFinalRule;
}

std::string final_pick(const ContentSpec& spec, const std::string& eval_a, const std::string& eval_b) {
  return "Two attempts, A and B, at a " + what(spec) + "\nwere evaluated separately.\n\n" + criteria_block(spec) +
         "\n## Evaluation of content A\n" + eval_a + "\n\n## Evaluation of content B\n" + eval_b +
         "\n\nWhich content is better overall, A or B?\n" + kFinalRule;
}

}  // namespace avr::evaluator::prompts
