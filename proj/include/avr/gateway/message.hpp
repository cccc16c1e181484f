#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace avr::gateway {

enum class Role { system, user, assistant };
enum class Capability { text_only, omni };

std::string_view to_string(Role role);
std::string_view to_string(Capability capability);
Capability parse_capability(std::string_view token);

/// Measured recording statistics riding along with a media part. Remote
/// clients ignore it; offline judges decide from it.
struct JudgeHint {
  double audio_rms = 0.0;
  double frame_variance = 0.0;
  int console_errors = 0;
};

struct TextPart {
  std::string text;
};

struct MediaPart {
  enum class Kind { video, audio };
  Kind kind = Kind::video;
  std::filesystem::path path;
  /// Presentation slot ("A", "B") or empty.
  std::string label;
  std::optional<JudgeHint> hint;
};

using Part = std::variant<TextPart, MediaPart>;

struct Message {
  Role role = Role::user;
  std::vector<Part> parts;

  static Message system(std::string text);
  static Message user(std::string text);
  static Message assistant(std::string text);

  bool has_media() const;
  /// Concatenated text parts.
  std::string text() const;
};

/// Video and audio parts for one recording, in that order.
std::vector<Part> media_parts(const std::filesystem::path& media, std::string label, std::optional<JudgeHint> hint);

/// Transcript form. Media paths under `relative_to` are written relative to it.
nlohmann::json to_json(const Message& message, const std::filesystem::path& relative_to = {});

/// Rough token estimate: ceil(chars / 4) over text parts.
std::size_t estimate_tokens(const std::vector<Message>& messages);

}  // namespace avr::gateway
