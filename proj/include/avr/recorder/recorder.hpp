#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "avr/core/types.hpp"

namespace avr::recorder {

namespace fs = std::filesystem;

enum class LogLevel { log, warn, error };
enum class LogSource { console, unhandled_exception };

std::string_view to_string(LogLevel level);
std::string_view to_string(LogSource source);
LogLevel parse_log_level(std::string_view token);
LogSource parse_log_source(std::string_view token);

struct LogEntry {
  LogLevel level = LogLevel::log;
  std::string message;
  std::int64_t t_ms = 0;
  LogSource source = LogSource::console;

  bool operator==(const LogEntry&) const = default;
};

struct ConsoleLog {
  std::vector<LogEntry> entries;

  int error_count() const;
  int warn_count() const;
  /// One `{level, message, t_ms, source}` object per line.
  std::string to_jsonl() const;
  static ConsoleLog from_jsonl(std::string_view text);
  /// Stable sort by t_ms, keeping arrival order among equal stamps.
  void normalize();
};

nlohmann::json to_json(const LogEntry& entry);
LogEntry log_entry_from(const nlohmann::json& j);

struct AVRecording {
  fs::path media_path;
  double duration_s = 0.0;
  int fps = 0;
  int width = 0;
  int height = 0;
  bool has_audio_track = false;
  double frame_variance = 0.0;
  double audio_rms = 0.0;
  /// Set when the page failed to load in time or capture was degraded.
  bool flagged = false;
};

nlohmann::json to_json(const AVRecording& rec, const fs::path& relative_to = {});
AVRecording recording_from(const nlohmann::json& j, const fs::path& base = {});

struct RecordJob {
  /// Full document text.
  std::string source;
  /// Directory served next to the document (holds `assets/`). May be empty.
  fs::path serve_root;
  /// Where the media file is written.
  fs::path media_out;
  RecordOptions opts;
};

struct RecordResult {
  AVRecording recording;
  ConsoleLog log;
  /// Harness-side notes such as "no start button".
  std::vector<std::string> warnings;
};

struct ProbeResult {
  bool loaded = false;
  int error_count = 0;
  int warn_count = 0;
};

class Recorder {
 public:
  virtual ~Recorder() = default;
  virtual std::string name() const = 0;
  virtual RecordResult record(const RecordJob& job) = 0;
  virtual ProbeResult probe(std::string_view source, const fs::path& serve_root, int budget_ms) = 0;
};

using RecorderPtr = std::shared_ptr<Recorder>;

/// Offline stand-in for a browser. Inspects the document's inline scripts to
/// predict console output, motion and audio, then synthesizes a matching clip.
/// Rules:
///   - unbalanced brackets or an unterminated string: one SyntaxError, script ignored
///   - statements at brace depth 0 run at load; a throw there stops the script
///   - nested code runs after the start click (t = start_wait_ms)
///   - a nested throw aborts the handler, so that script produces no audio
///   - requestAnimationFrame, setInterval or CSS animation: motion
///   - AudioContext, Audio(), Tone.js or <audio>: sound, only with a start button
class SimulatedRecorder final : public Recorder {
 public:
  std::string name() const override { return "simulated"; }
  RecordResult record(const RecordJob& job) override;
  ProbeResult probe(std::string_view source, const fs::path& serve_root, int budget_ms) override;

  struct Prediction {
    ConsoleLog log;
    bool has_start_button = false;
    bool motion = false;
    bool audio = false;
  };
  static Prediction predict(std::string_view source, const RecordOptions& opts);
};

/// Drives a Chromium-family browser over the DevTools pipe. The page is served
/// from a loopback server with the shim injected before any page script.
struct BrowserOptions {
  /// Empty: AVR_BROWSER, then the usual executable names on PATH.
  fs::path executable;
  /// Empty: AVR_SHIM_JS, then the shim bundled next to the data directory.
  fs::path shim_js;
  int pool_size = 2;
  int teardown_slack_ms = 5000;
};

/// Shim script: `configured`, else AVR_SHIM_JS, else data/shim/avr-shim.js.
fs::path find_shim(const fs::path& configured = {});

/// Browser executable found via AVR_BROWSER or PATH, or empty.
fs::path find_browser();

RecorderPtr make_browser_recorder(BrowserOptions options = {});

/// "simulated", "browser" or "auto" (browser when one is found).
RecorderPtr make_recorder(std::string_view kind, BrowserOptions options = {});

}  // namespace avr::recorder
