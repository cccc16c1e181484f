#include "avr/core/criteria.hpp"

#include <array>

namespace avr {
namespace {

const std::array<Criterion, 8> kCatalog{{
    {"Description Fidelity",
     "How well does the {content-type} match the following description? Description: {content-description}",
     Applicability::all},
    {"Visual Design", "How appealing are the graphics and animations? Are colors, shapes, and layout harmonious?",
     Applicability::all},
    {"Audio Quality",
     "How well does the audio (sound effects and music) align with the content and enhance its quality?",
     Applicability::all},
    {"Behavior Correctness", "Are there any broken behaviors?", Applicability::all},
    {"Gameplay Quality", "How engaging and fun is the gameplay?", Applicability::game_only},
    {"AI Player Quality", "How well does the AI play the game?", Applicability::game_only},
    {"Smoothness", "How smooth and fluid are the animations? Are key frames and timing polished?",
     Applicability::animation_only},
    {"Creativity and Originality", "How creative and interesting is the animation?", Applicability::animation_only},
}};

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
}

}  // namespace

std::span<const Criterion> criteria_catalog() { return kCatalog; }

std::vector<Criterion> criteria_for(ContentKind kind) {
  const auto specific = kind == ContentKind::game ? Applicability::game_only : Applicability::animation_only;
  std::vector<Criterion> out;
  for (const auto& c : kCatalog)
    if (c.applicability == Applicability::all) out.push_back(c);
  for (const auto& c : kCatalog)
    if (c.applicability == specific) out.push_back(c);
  return out;
}

std::vector<Criterion> criteria_for(std::string_view kind_token) {
  return criteria_for(parse_content_kind(kind_token));
}

std::string_view content_type_word(ContentKind kind) { return to_string(kind); }

std::string expand_placeholders(std::string_view text, const ContentSpec& spec) {
  std::string out(text);
  replace_all(out, "{content-type}", content_type_word(spec.kind));
  replace_all(out, "{content-description}", spec.full_description());
  return out;
}

std::string render_criteria(const ContentSpec& spec) {
  std::string out;
  for (const auto& c : criteria_for(spec.kind)) {
    out += "- ";
    out += c.name;
    out += ": ";
    out += expand_placeholders(c.question, spec);
    out += '\n';
  }
  return out;
}

}  // namespace avr
