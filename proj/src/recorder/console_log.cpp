#include <algorithm>
#include <sstream>

#include "avr/core/errors.hpp"
#include "avr/recorder/recorder.hpp"

namespace avr::recorder {

std::string_view to_string(LogLevel level) {
  switch (level) {
    case LogLevel::log:
      return "log";
    case LogLevel::warn:
      return "warn";
    case LogLevel::error:
      return "error";
  }
  return "?";
}

std::string_view to_string(LogSource source) {
  return source == LogSource::console ? "console" : "unhandled_exception";
}

LogLevel parse_log_level(std::string_view token) {
  if (token == "log" || token == "info" || token == "debug") return LogLevel::log;
  if (token == "warn" || token == "warning") return LogLevel::warn;
  if (token == "error") return LogLevel::error;
  throw ValidationError("unknown log level '" + std::string(token) + "'");
}

LogSource parse_log_source(std::string_view token) {
  if (token == "console") return LogSource::console;
  if (token == "unhandled_exception") return LogSource::unhandled_exception;
  throw ValidationError("unknown log source '" + std::string(token) + "'");
}

nlohmann::json to_json(const LogEntry& e) {
  return {{"level", to_string(e.level)}, {"message", e.message}, {"t_ms", e.t_ms}, {"source", to_string(e.source)}};
}

LogEntry log_entry_from(const nlohmann::json& j) {
  LogEntry e;
  e.level = parse_log_level(j.at("level").get<std::string>());
  e.message = j.at("message").is_string() ? j.at("message").get<std::string>() : j.at("message").dump();
  const auto& t = j.at("t_ms");
  e.t_ms = t.is_number_integer() ? t.get<std::int64_t>() : static_cast<std::int64_t>(t.get<double>());
  e.source = parse_log_source(j.value("source", std::string("console")));
  return e;
}

int ConsoleLog::error_count() const {
  return static_cast<int>(std::count_if(entries.begin(), entries.end(),
                                        [](const LogEntry& e) { return e.level == LogLevel::error; }));
}

int ConsoleLog::warn_count() const {
  return static_cast<int>(
      std::count_if(entries.begin(), entries.end(), [](const LogEntry& e) { return e.level == LogLevel::warn; }));
}

std::string ConsoleLog::to_jsonl() const {
  std::string out;
  for (const auto& e : entries) out += to_json(e).dump() + "\n";
  return out;
}

ConsoleLog ConsoleLog::from_jsonl(std::string_view text) {
  ConsoleLog log;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      log.entries.push_back(log_entry_from(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("console log line " + std::to_string(n) + ": " + e.what());
    }
  }
  return log;
}

void ConsoleLog::normalize() {
  std::stable_sort(entries.begin(), entries.end(), [](const LogEntry& a, const LogEntry& b) { return a.t_ms < b.t_ms; });
}

nlohmann::json to_json(const AVRecording& r, const fs::path& relative_to) {
  auto path = r.media_path;
  if (!relative_to.empty()) {
    const auto rel = path.lexically_relative(relative_to);
    if (!rel.empty() && *rel.begin() != "..") path = rel;
  }
  return {{"media_path", path.generic_string()},
          {"duration_s", r.duration_s},
          {"fps", r.fps},
          {"width", r.width},
          {"height", r.height},
          {"has_audio_track", r.has_audio_track},
          {"frame_variance", r.frame_variance},
          {"audio_rms", r.audio_rms},
          {"flagged", r.flagged}};
}

AVRecording recording_from(const nlohmann::json& j, const fs::path& base) {
  AVRecording r;
  fs::path p = j.at("media_path").get<std::string>();
  r.media_path = (p.is_relative() && !base.empty()) ? base / p : p;
  r.duration_s = j.at("duration_s").get<double>();
  r.fps = j.at("fps").get<int>();
  r.width = j.at("width").get<int>();
  r.height = j.at("height").get<int>();
  r.has_audio_track = j.at("has_audio_track").get<bool>();
  r.frame_variance = j.at("frame_variance").get<double>();
  r.audio_rms = j.at("audio_rms").get<double>();
  r.flagged = j.value("flagged", false);
  return r;
}

}  // namespace avr::recorder
