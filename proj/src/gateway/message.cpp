#include "avr/gateway/message.hpp"

#include "avr/core/errors.hpp"

namespace avr::gateway {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::system:
      return "system";
    case Role::user:
      return "user";
    case Role::assistant:
      return "assistant";
  }
  return "?";
}

std::string_view to_string(Capability capability) {
  return capability == Capability::omni ? "omni" : "text_only";
}

Capability parse_capability(std::string_view token) {
  if (token == "omni") return Capability::omni;
  if (token == "text_only" || token == "text") return Capability::text_only;
  throw ValidationError("unknown capability '" + std::string(token) + "' (expected text_only|omni)");
}

Message Message::system(std::string text) { return {Role::system, {TextPart{std::move(text)}}}; }
Message Message::user(std::string text) { return {Role::user, {TextPart{std::move(text)}}}; }
Message Message::assistant(std::string text) { return {Role::assistant, {TextPart{std::move(text)}}}; }

bool Message::has_media() const {
  for (const auto& p : parts)
    if (std::holds_alternative<MediaPart>(p)) return true;
  return false;
}

std::string Message::text() const {
  std::string out;
  for (const auto& p : parts) {
    if (const auto* t = std::get_if<TextPart>(&p)) {
      if (!out.empty()) out += '\n';
      out += t->text;
    }
  }
  return out;
}

std::vector<Part> media_parts(const std::filesystem::path& media, std::string label, std::optional<JudgeHint> hint) {
  return {MediaPart{MediaPart::Kind::video, media, label, hint}, MediaPart{MediaPart::Kind::audio, media, label, hint}};
}

nlohmann::json to_json(const Message& m, const std::filesystem::path& relative_to) {
  nlohmann::json parts = nlohmann::json::array();
  for (const auto& p : m.parts) {
    if (const auto* t = std::get_if<TextPart>(&p)) {
      parts.push_back({{"type", "text"}, {"text", t->text}});
      continue;
    }
    const auto& media = std::get<MediaPart>(p);
    auto path = media.path;
    if (!relative_to.empty()) {
      const auto rel = path.lexically_relative(relative_to);
      if (!rel.empty() && *rel.begin() != "..") path = rel;
    }
    nlohmann::json j{{"type", media.kind == MediaPart::Kind::video ? "video" : "audio"},
                     {"path", path.generic_string()}};
    if (!media.label.empty()) j["label"] = media.label;
    parts.push_back(std::move(j));
  }
  return {{"role", to_string(m.role)}, {"parts", std::move(parts)}};
}

std::size_t estimate_tokens(const std::vector<Message>& messages) {
  std::size_t chars = 0;
  for (const auto& m : messages)
    for (const auto& p : m.parts)
      if (const auto* t = std::get_if<TextPart>(&p)) chars += t->text.size();
  return (chars + 3) / 4;
}

}  // namespace avr::gateway
