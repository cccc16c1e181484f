#include <algorithm>
#include <cctype>
#include <regex>

#include "avr/core/errors.hpp"
#include "avr/core/hash.hpp"
#include "avr/media/media.hpp"
#include "avr/recorder/recorder.hpp"

namespace avr::recorder {

namespace {

bool iequals_at(std::string_view s, std::size_t pos, std::string_view word) {
  if (pos + word.size() > s.size()) return false;
  for (std::size_t i = 0; i < word.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(s[pos + i])) != word[i]) return false;
  return true;
}

std::size_t ifind(std::string_view s, std::string_view word, std::size_t from) {
  for (std::size_t i = from; i + word.size() <= s.size(); ++i)
    if (iequals_at(s, i, word)) return i;
  return std::string_view::npos;
}

std::vector<std::string> inline_scripts(std::string_view html) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = ifind(html, "<script", pos)) != std::string_view::npos) {
    const auto tag_end = html.find('>', pos);
    if (tag_end == std::string_view::npos) break;
    const auto close = ifind(html, "</script", tag_end + 1);
    const auto body_end = close == std::string_view::npos ? html.size() : close;
    const auto tag = html.substr(pos, tag_end - pos);
    if (ifind(tag, "src=", 0) == std::string_view::npos) out.emplace_back(html.substr(tag_end + 1, body_end - tag_end - 1));
    pos = body_end;
  }
  return out;
}

bool is_ident(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }

// Source with comments and string contents blanked, plus the brace depth at
// every offset. `error` is set when a string, comment or bracket is left open.
struct Scan {
  std::string mask;
  std::vector<int> depth;
  std::string error;
};

Scan scan(std::string_view code) {
  Scan s;
  s.mask.assign(code.size(), ' ');
  s.depth.assign(code.size() + 1, 0);
  std::vector<char> stack;
  int braces = 0;
  char prev_sig = 0;  // last significant character, to tell regex literals from division
  std::size_t i = 0;
  auto keep = [&](std::size_t at) { s.mask[at] = code[at]; };
  while (i < code.size()) {
    s.depth[i] = braces;
    const char c = code[i];
    const char next = i + 1 < code.size() ? code[i + 1] : 0;
    if (c == '/' && next == '/') {
      while (i < code.size() && code[i] != '\n') s.depth[i++] = braces;
      continue;
    }
    if (c == '/' && next == '*') {
      const auto end = code.find("*/", i + 2);
      if (end == std::string_view::npos) {
        s.error = "Unexpected end of input";
        return s;
      }
      for (; i < end + 2; ++i) s.depth[i] = braces;
      continue;
    }
    if (c == '"' || c == '\'' || c == '`') {
      keep(i);
      std::size_t j = i + 1;
      while (j < code.size() && code[j] != c) {
        if (code[j] == '\\') ++j;
        else if (code[j] == '\n' && c != '`') break;
        ++j;
      }
      if (j >= code.size() || code[j] != c) {
        s.error = c == '`' ? "Unterminated template literal" : "Invalid or unexpected token";
        return s;
      }
      for (std::size_t k = i; k <= j; ++k) s.depth[k] = braces;
      keep(j);
      i = j + 1;
      prev_sig = c;
      continue;
    }
    if (c == '/' && (prev_sig == 0 || std::string_view("(,=:[!&|?{};+-*%<>~^").find(prev_sig) != std::string_view::npos)) {
      std::size_t j = i + 1;
      bool in_class = false;
      while (j < code.size() && code[j] != '\n') {
        if (code[j] == '\\') ++j;
        else if (code[j] == '[') in_class = true;
        else if (code[j] == ']') in_class = false;
        else if (code[j] == '/' && !in_class) break;
        ++j;
      }
      if (j < code.size() && code[j] == '/') {
        for (std::size_t k = i; k <= j; ++k) s.depth[k] = braces;
        i = j + 1;
        prev_sig = 'r';
        continue;
      }
    }
    keep(i);
    if (c == '{' || c == '(' || c == '[') {
      stack.push_back(c);
      if (c == '{') ++braces;
    } else if (c == '}' || c == ')' || c == ']') {
      const char open = c == '}' ? '{' : c == ')' ? '(' : '[';
      if (stack.empty() || stack.back() != open) {
        s.error = std::string("Unexpected token '") + c + "'";
        return s;
      }
      stack.pop_back();
      if (c == '}') --braces;
      s.depth[i] = braces;
    }
    if (!std::isspace(static_cast<unsigned char>(c))) prev_sig = is_ident(c) ? 'a' : c;
    ++i;
  }
  s.depth[code.size()] = braces;
  if (!stack.empty()) s.error = "Unexpected end of input";
  return s;
}

bool word_at(std::string_view mask, std::size_t pos, std::string_view word) {
  if (mask.substr(pos, word.size()) != word) return false;
  if (pos > 0 && (is_ident(mask[pos - 1]) || mask[pos - 1] == '.')) return false;
  const auto end = pos + word.size();
  return end >= mask.size() || !is_ident(mask[end]);
}

std::vector<std::size_t> find_words(std::string_view mask, std::string_view word) {
  std::vector<std::size_t> out;
  for (auto pos = mask.find(word); pos != std::string_view::npos; pos = mask.find(word, pos + 1))
    if (word_at(mask, pos, word)) out.push_back(pos);
  return out;
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

// Arguments of the call whose '(' is at `open`, rendered like the console
// would: string literals unquoted, anything else as written.
std::string call_message(std::string_view code, const Scan& sc, std::size_t open) {
  std::vector<std::string> args;
  int level = 0;
  std::size_t start = open + 1;
  for (std::size_t i = open; i < code.size(); ++i) {
    const char c = sc.mask[i];
    if (c == '(' || c == '[' || c == '{') ++level;
    if (c == ')' || c == ']' || c == '}') {
      if (--level == 0) {
        args.push_back(trim(code.substr(start, i - start)));
        break;
      }
    }
    if (c == ',' && level == 1) {
      args.push_back(trim(code.substr(start, i - start)));
      start = i + 1;
    }
  }
  std::string msg;
  for (auto& a : args) {
    if (a.empty()) continue;
    if (a.size() >= 2 && (a.front() == '"' || a.front() == '\'' || a.front() == '`') && a.back() == a.front())
      a = a.substr(1, a.size() - 2);
    if (!msg.empty()) msg += ' ';
    msg += a;
  }
  return msg;
}

std::string throw_message(std::string_view code, const Scan& sc, std::size_t pos) {
  std::size_t end = pos + 5;
  while (end < code.size() && sc.mask[end] != ';' && sc.mask[end] != '\n' && sc.mask[end] != '}') ++end;
  const auto expr = trim(code.substr(pos + 5, end - pos - 5));
  static const std::regex error_ctor(R"(^new\s+(\w+)\s*\(\s*(['"`])([\s\S]*?)\2\s*\)$)");
  std::smatch m;
  if (std::regex_match(expr, m, error_ctor)) return "Uncaught " + m[1].str() + ": " + m[3].str();
  static const std::regex bare_ctor(R"(^new\s+(\w+)\s*\(\s*\)$)");
  if (std::regex_match(expr, m, bare_ctor)) return "Uncaught " + m[1].str();
  return "Uncaught " + expr;
}

struct Event {
  std::size_t pos;
  LogEntry entry;
  bool is_throw;
};

bool has_any(std::string_view mask, std::initializer_list<std::string_view> words, std::size_t before) {
  for (auto w : words)
    for (auto p : find_words(mask, w))
      if (p < before) return true;
  return false;
}

}  // namespace

SimulatedRecorder::Prediction SimulatedRecorder::predict(std::string_view source, const RecordOptions& opts) {
  Prediction out;
  static const std::regex start_re(R"(id\s*=\s*["']start-button["'])", std::regex::icase);
  const std::string doc(source);
  out.has_start_button = std::regex_search(doc, start_re);
  const bool css_motion = ifind(source, "@keyframes", 0) != std::string_view::npos;
  const bool audio_tag = ifind(source, "<audio", 0) != std::string_view::npos;
  out.motion = css_motion;
  out.audio = audio_tag && out.has_start_button;

  std::vector<LogEntry> load_entries;
  std::vector<LogEntry> start_entries;
  for (const auto& code : inline_scripts(source)) {
    const auto sc = scan(code);
    if (!sc.error.empty()) {
      load_entries.push_back(
          {LogLevel::error, "Uncaught SyntaxError: " + sc.error, 0, LogSource::unhandled_exception});
      continue;
    }
    std::vector<Event> events;
    for (auto p : find_words(sc.mask, "throw")) {
      events.push_back({p, {LogLevel::error, throw_message(code, sc, p), 0, LogSource::unhandled_exception}, true});
    }
    static const std::regex console_re(R"(console\s*\.\s*(log|info|debug|warn|error)\s*\()");
    for (auto it = std::sregex_iterator(sc.mask.begin(), sc.mask.end(), console_re); it != std::sregex_iterator(); ++it) {
      const auto p = static_cast<std::size_t>(it->position(0));
      if (!word_at(sc.mask, p, "console")) continue;
      const auto open = p + static_cast<std::size_t>(it->length(0)) - 1;
      events.push_back({p, {parse_log_level((*it)[1].str()), call_message(code, sc, open), 0, LogSource::console}, false});
    }
    std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.pos < b.pos; });

    std::size_t alive_until = code.size();
    bool handler_aborted = false;
    for (const auto& ev : events) {
      if (ev.pos >= alive_until) break;
      if (sc.depth[ev.pos] == 0) {
        load_entries.push_back(ev.entry);
        if (ev.is_throw) alive_until = ev.pos;
      } else {
        auto e = ev.entry;
        e.t_ms = opts.start_wait_ms;
        start_entries.push_back(e);
        if (ev.is_throw) handler_aborted = true;
      }
    }
    if (has_any(sc.mask, {"requestAnimationFrame", "setInterval"}, alive_until)) out.motion = true;
    const bool sound = has_any(sc.mask, {"AudioContext", "webkitAudioContext", "Audio", "Tone"}, alive_until);
    if (sound && out.has_start_button && !handler_aborted) out.audio = true;
  }
  out.log.entries = std::move(load_entries);
  out.log.entries.insert(out.log.entries.end(), start_entries.begin(), start_entries.end());
  out.log.normalize();
  return out;
}

RecordResult SimulatedRecorder::record(const RecordJob& job) {
  validate(job.opts);
  if (job.source.empty()) throw ValidationError("cannot record an empty document");
  const auto prediction = predict(job.source, job.opts);

  media::SynthSpec synth;
  synth.duration_s = job.opts.duration_s;
  synth.fps = job.opts.fps;
  synth.width = job.opts.width_px & ~1;
  synth.height = job.opts.height_px & ~1;
  synth.motion = prediction.motion;
  synth.audio = prediction.audio;
  synth.audio_start_s = job.opts.start_wait_ms / 1000.0;
  const auto h = fnv1a64(job.source);
  // Same motion for every moving page; only the tone varies per document.
  synth.tone_hz = 330.0 + static_cast<double>(h % 440);
  if (!prediction.has_start_button && !prediction.motion && !prediction.audio) synth.box = synth.background;

  fs::create_directories(job.media_out.parent_path());
  media::synthesize_webm(job.media_out, synth);
  const auto stats = media::analyze(job.media_out);

  RecordResult out;
  out.log = prediction.log;
  if (!prediction.has_start_button) out.warnings.push_back("no start button");
  out.recording.media_path = job.media_out;
  out.recording.duration_s = stats.duration_s;
  out.recording.fps = job.opts.fps;
  out.recording.width = stats.width;
  out.recording.height = stats.height;
  out.recording.has_audio_track = stats.has_audio;
  out.recording.frame_variance = stats.frame_variance;
  out.recording.audio_rms = stats.audio_rms;
  return out;
}

ProbeResult SimulatedRecorder::probe(std::string_view source, const fs::path&, int budget_ms) {
  if (source.empty()) throw ValidationError("cannot probe an empty document");
  if (budget_ms <= 0) throw ValidationError("probe budget must be positive");
  RecordOptions opts;
  const auto p = predict(source, opts);
  ProbeResult r;
  r.loaded = true;
  for (const auto& e : p.log.entries) {
    if (e.t_ms > budget_ms) continue;
    if (e.level == LogLevel::error) ++r.error_count;
    if (e.level == LogLevel::warn) ++r.warn_count;
  }
  return r;
}

}  // namespace avr::recorder
