#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "avr/core/types.hpp"

namespace avr {

enum class Applicability { all, game_only, animation_only };

struct Criterion {
  std::string name;
  /// Question text with "{content-type}" / "{content-description}" left in place.
  std::string question;
  Applicability applicability = Applicability::all;

  bool operator==(const Criterion&) const = default;
};

/// The eight judging criteria, base ones first.
std::span<const Criterion> criteria_catalog();

/// Four base criteria followed by the two specific to `kind`.
std::vector<Criterion> criteria_for(ContentKind kind);
std::vector<Criterion> criteria_for(std::string_view kind_token);

/// Word used for "{content-type}" in prompts ("game" / "animation").
std::string_view content_type_word(ContentKind kind);

/// Substitutes both placeholders for `spec`.
std::string expand_placeholders(std::string_view text, const ContentSpec& spec);

/// "- Name: question" lines with placeholders expanded, one per criterion.
std::string render_criteria(const ContentSpec& spec);

}  // namespace avr
