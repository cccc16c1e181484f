#include <regex>
#include <sstream>

#include "avr/core/errors.hpp"
#include "avr/evaluator/evaluator.hpp"

namespace avr::evaluator {

void EvalMode::validate() const {
  if (multiround && !relative) throw ValidationError("eval mode: multiround requires relative");
}

std::string EvalMode::token() const {
  return std::string{multiround ? '1' : '0', relative ? '1' : '0', review ? '1' : '0'};
}

EvalMode parse_mode(std::string_view token) {
  if (token == "full") return {};
  if (token.size() == 3 && token.find_first_not_of("01") == std::string_view::npos) {
    EvalMode m{token[0] == '1', token[1] == '1', token[2] == '1'};
    m.validate();
    return m;
  }
  throw ValidationError("unknown eval mode '" + std::string(token) +
                        "' (expected full or three 0/1 flags for multiround, relative, review)");
}

std::string_view to_string(ParseStatus status) {
  switch (status) {
    case ParseStatus::clean:
      return "clean";
    case ParseStatus::coerced:
      return "coerced";
    case ParseStatus::fallback:
      return "fallback";
  }
  return "?";
}

ParseStatus parse_status_from(std::string_view token) {
  if (token == "clean") return ParseStatus::clean;
  if (token == "coerced") return ParseStatus::coerced;
  if (token == "fallback") return ParseStatus::fallback;
  throw ValidationError("unknown parse status '" + std::string(token) + "'");
}

Verdict parse_verdict(std::string_view text) {
  static const std::regex final_line(R"(^[\s*_#>]*FINAL\s*:\s*[*_]*\s*(?:Content\s+)?([AB])\b)",
                                     std::regex::icase);
  std::optional<char> final_side;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    std::smatch m;
    if (std::regex_search(line, m, final_line)) final_side = static_cast<char>(std::toupper(m[1].str()[0]));
  }
  if (final_side) return {*final_side, ParseStatus::clean};

  std::string body(text);
  while (!body.empty() && std::isspace(static_cast<unsigned char>(body.back()))) body.pop_back();
  while (!body.empty() && std::string_view(".!?").find(body.back()) != std::string_view::npos) body.pop_back();
  const auto cut = body.find_last_of(".!?\n");
  const auto sentence = cut == std::string::npos ? body : body.substr(cut + 1);
  static const std::regex token(R"((^|[^A-Za-z0-9_])([AB])(?=$|[^A-Za-z0-9_]))");
  std::optional<char> last;
  for (auto it = std::sregex_iterator(sentence.begin(), sentence.end(), token); it != std::sregex_iterator(); ++it)
    last = (*it)[2].str()[0];
  if (last) return {*last, ParseStatus::coerced};
  return {'B', ParseStatus::fallback};
}

}  // namespace avr::evaluator
