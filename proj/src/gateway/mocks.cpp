#include "avr/gateway/mocks.hpp"

#include <cmath>
#include <cstdio>
#include <regex>
#include <set>
#include <sstream>

#include "avr/core/hash.hpp"

namespace avr::gateway {

MockKind parse_mock_kind(std::string_view token) {
  if (token == "scripted") return MockKind::scripted;
  if (token == "heuristic_judge") return MockKind::heuristic_judge;
  if (token == "template_coder") return MockKind::template_coder;
  throw ValidationError("unknown mock kind '" + std::string(token) +
                        "' (expected scripted|heuristic_judge|template_coder)");
}

std::string_view to_string(MockKind kind) {
  switch (kind) {
    case MockKind::scripted:
      return "scripted";
    case MockKind::heuristic_judge:
      return "heuristic_judge";
    case MockKind::template_coder:
      return "template_coder";
  }
  return "?";
}

std::string prompt_hash(const ChatRequest& request) {
  std::string all;
  for (const auto& m : request.messages) {
    all += to_string(m.role);
    all += ':';
    all += m.text();
    all += '\n';
  }
  return fnv1a64_hex(all);
}

// ---------------------------------------------------------------- scripted

ScriptedClient::ScriptedClient(std::string name, Capability capability, std::vector<std::string> replies,
                               std::map<std::string, std::string> by_hash, std::optional<std::string> fallback,
                               int fail_first)
    : ModelClient(std::move(name), capability, {}),
      queue_(replies.begin(), replies.end()),
      by_hash_(std::move(by_hash)),
      fallback_(std::move(fallback)),
      fail_remaining_(fail_first) {}

std::string ScriptedClient::complete(const ChatRequest& request) {
  std::lock_guard lock(mu_);
  seen_.push_back(request);
  if (fail_remaining_ > 0) {
    --fail_remaining_;
    throw TransientError("injected transient failure");
  }
  if (!by_hash_.empty()) {
    if (auto it = by_hash_.find(prompt_hash(request)); it != by_hash_.end()) return it->second;
  }
  if (!queue_.empty()) {
    auto reply = std::move(queue_.front());
    queue_.pop_front();
    return reply;
  }
  if (fallback_) return *fallback_;
  throw RuntimeFailure("scripted client '" + name() + "' has no reply left");
}

std::size_t ScriptedClient::calls() const {
  std::lock_guard lock(mu_);
  return seen_.size();
}

std::vector<ChatRequest> ScriptedClient::requests() const {
  std::lock_guard lock(mu_);
  return seen_;
}

FunctionClient::FunctionClient(std::string name, Capability capability, Fn fn)
    : ModelClient(std::move(name), capability, {}), fn_(std::move(fn)) {}

std::string FunctionClient::complete(const ChatRequest& request) {
  {
    std::lock_guard lock(mu_);
    ++calls_;
  }
  return fn_(request);
}

std::size_t FunctionClient::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

// ------------------------------------------------------------- stats tags

std::string format_stats_tag(std::string_view label, const JudgeHint& h) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "[stats label=%.*s audio_rms=%.6f frame_variance=%.6f console_errors=%d]",
                static_cast<int>(label.size()), label.data(), h.audio_rms, h.frame_variance, h.console_errors);
  return buf;
}

std::map<std::string, JudgeHint> parse_stats_tags(std::string_view text) {
  static const std::regex re(
      R"(\[stats label=(\w+) audio_rms=([-+0-9.eE]+) frame_variance=([-+0-9.eE]+) console_errors=(\d+)\])");
  std::map<std::string, JudgeHint> out;
  const std::string s(text);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    JudgeHint h{std::stod(m[2].str()), std::stod(m[3].str()), std::stoi(m[4].str())};
    out.emplace(m[1].str(), h);
  }
  return out;
}

bool heuristic_prefers(const JudgeHint& a, const JudgeHint& b) {
  const double sa = a.audio_rms + a.frame_variance;
  const double sb = b.audio_rms + b.frame_variance;
  if (sa != sb) return sa > sb;
  if (a.console_errors != b.console_errors) return a.console_errors < b.console_errors;
  return true;
}

// --------------------------------------------------------- heuristic judge

namespace {

std::vector<std::string> listed_criteria(std::string_view text) {
  std::vector<std::string> names;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("- ", 0) != 0) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos || colon < 3) continue;
    names.push_back(line.substr(2, colon - 2));
  }
  return names;
}

std::string rating(const JudgeHint& h) {
  const bool motion = h.frame_variance > 1.0;
  const bool sound = h.audio_rms > 0.01;
  if (motion && sound && h.console_errors == 0) return "strong";
  if (motion || sound) return "partial";
  return "weak";
}

std::string describe(std::string_view label, const JudgeHint& h) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "Content %.*s shows %s visuals (frame variance %.2f) and %s (audio RMS %.4f). Console errors: %d.",
                static_cast<int>(label.size()), label.data(), h.frame_variance > 1.0 ? "moving" : "static",
                h.frame_variance, h.audio_rms > 0.01 ? "audible sound" : "no audible sound", h.audio_rms,
                h.console_errors);
  return buf;
}

}  // namespace

HeuristicJudge::HeuristicJudge(std::string name) : ModelClient(std::move(name), Capability::omni, {}) {}

std::string HeuristicJudge::complete(const ChatRequest& request) {
  std::map<std::string, JudgeHint> known;
  std::vector<std::string> last_labels;
  for (std::size_t i = 0; i < request.messages.size(); ++i) {
    const auto& m = request.messages[i];
    for (const auto& p : m.parts) {
      const auto* media = std::get_if<MediaPart>(&p);
      if (!media || media->label.empty()) continue;
      known.emplace(media->label, media->hint.value_or(JudgeHint{}));
      if (i + 1 == request.messages.size() &&
          std::find(last_labels.begin(), last_labels.end(), media->label) == last_labels.end())
        last_labels.push_back(media->label);
    }
    for (auto& [label, hint] : parse_stats_tags(m.text())) known.emplace(label, hint);
  }
  const auto text = request.messages.back().text();
  const auto criteria = listed_criteria(text);

  if (text.find("FINAL:") != std::string::npos) {
    const auto a = known.count("A") ? known["A"] : JudgeHint{};
    const auto b = known.count("B") ? known["B"] : JudgeHint{};
    const bool pick_a = heuristic_prefers(a, b);
    char buf[256];
    std::snprintf(buf, sizeof buf, "Liveliness A %.4f vs B %.4f; console errors A %d vs B %d.",
                  a.audio_rms + a.frame_variance, b.audio_rms + b.frame_variance, a.console_errors, b.console_errors);
    std::string tags;
    for (const auto& label : last_labels) tags += format_stats_tag(label, known[label]) + "\n";
    return tags + buf + "\nFINAL: " + (pick_a ? "A" : "B");
  }

  std::string out;
  for (const auto& label : last_labels) {
    out += describe(label, known[label]) + "\n" + format_stats_tag(label, known[label]) + "\n";
  }
  if (!criteria.empty()) {
    const auto subject = last_labels.empty() ? (known.empty() ? JudgeHint{} : known.begin()->second)
                                             : known[last_labels.front()];
    out += "Assessment per criterion:\n";
    for (const auto& c : criteria) out += "- " + c + ": " + rating(subject) + "\n";
  }
  if (out.empty()) out = "No media or criteria to assess.\n";
  return out;
}

// ----------------------------------------------------------- template coder

namespace {

std::string field(std::string_view text, std::string_view key) {
  const std::string s(text);
  const auto pos = s.find(std::string(key) + ":");
  if (pos == std::string::npos) return {};
  auto start = pos + key.size() + 1;
  while (start < s.size() && s[start] == ' ') ++start;
  const auto end = s.find('\n', start);
  return s.substr(start, end == std::string::npos ? std::string::npos : end - start);
}

std::string escape_html(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

void replace_all(std::string& s, std::string_view what, std::string_view with) {
  for (auto pos = s.find(what); pos != std::string::npos; pos = s.find(what, pos + with.size()))
    s.replace(pos, what.size(), with);
}

// Listed items of a selection prompt: the token after "- " up to ':' or space.
std::vector<std::string> listed_items(std::string_view text, char stop) {
  std::vector<std::string> items;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("- ", 0) != 0) continue;
    auto end = line.find(stop, 2);
    items.push_back(line.substr(2, end == std::string::npos ? std::string::npos : end - 2));
  }
  return items;
}

constexpr const char* kHead = R"(<!DOCTYPE html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>{{TITLE}}</title>
<style>
  html, body { margin: 0; height: 100%; background: #101018; overflow: hidden; }
  canvas { display: block; margin: 0 auto; }
  #start-button { position: absolute; left: 50%; top: 50%; transform: translate(-50%, -50%);
    font-size: 32px; padding: 24px 56px; cursor: pointer; }
</style>
</head>
<body>
<!-- {{ID}} revision {{REV}} -->
<canvas id="view" width="640" height="480"></canvas>
<button id="start-button">Start</button>
<script>
const canvas = document.getElementById('view');
const ctx = canvas.getContext('2d');
const startButton = document.getElementById('start-button');
const info = "{{DESC}}";
)";

constexpr const char* kLively = R"(let audio = null;
let muted = false;
let humanControl = false;
let x = 40;
let vx = 180;
let last = 0;
function beep() {
  if (!audio || muted) return;
  const osc = audio.createOscillator();
  const gain = audio.createGain();
  osc.frequency.value = 440;
  gain.gain.value = 0.2;
  osc.connect(gain).connect(audio.destination);
  osc.start();
  osc.stop(audio.currentTime + 0.15);
}
function frame(t) {
  const dt = last ? (t - last) / 1000 : 0;
  last = t;
  x += vx * dt;
  if (x < 0 || x > canvas.width - 60) {
    vx = -vx;
    x = Math.max(0, Math.min(canvas.width - 60, x));
  }
  ctx.fillStyle = '#101018';
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  ctx.fillStyle = 'hsl({{HUE}}, 80%, 60%)';
  ctx.fillRect(x, canvas.height / 2 - 30, 60, 60);
  ctx.fillStyle = '#ddd';
  ctx.font = '16px sans-serif';
  ctx.fillText(info, 12, 24);
  requestAnimationFrame(frame);
}
startButton.addEventListener('click', () => {
  startButton.style.display = 'none';
  audio = new AudioContext();
  setInterval(beep, 500);
  requestAnimationFrame(frame);
});
document.addEventListener('keydown', (e) => {
  if (e.key === 'm' || e.key === 'M') muted = !muted;
  if (e.key === 'F4') humanControl = !humanControl;
});
</script>
</body>
</html>
)";

constexpr const char* kCalm = R"(let muted = false;
function draw() {
  ctx.fillStyle = '#101018';
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  ctx.fillStyle = 'hsl({{HUE}}, 40%, 40%)';
  ctx.fillRect(290, 210, 60, 60);
  ctx.fillStyle = '#ddd';
  ctx.font = '16px sans-serif';
  ctx.fillText(info, 12, 24);
}
startButton.addEventListener('click', () => {
  startButton.style.display = 'none';
  draw();
});
document.addEventListener('keydown', (e) => {
  if (e.key === 'm' || e.key === 'M') muted = !muted;
});
draw();
</script>
</body>
</html>
)";

constexpr const char* kError = R"(let audio = null;
let x = 40;
let vx = 120;
let last = 0;
function frame(t) {
  const dt = last ? (t - last) / 1000 : 0;
  last = t;
  x += vx * dt;
  if (x < 0 || x > canvas.width - 60) vx = -vx;
  ctx.fillStyle = '#101018';
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  ctx.fillStyle = 'hsl({{HUE}}, 80%, 60%)';
  ctx.fillRect(x, 120, 60, 60);
  requestAnimationFrame(frame);
}
startButton.addEventListener('click', () => {
  startButton.style.display = 'none';
  requestAnimationFrame(frame);
  throw new Error('audio engine not initialised');
});
</script>
</body>
</html>
)";

}  // namespace

std::string render_template(std::string_view variant, std::string_view content_id, std::string_view kind,
                            std::string_view description, int revision) {
  std::string body;
  if (variant == "lively")
    body = kLively;
  else if (variant == "calm")
    body = kCalm;
  else if (variant == "error")
    body = kError;
  else
    throw ValidationError("unknown template variant '" + std::string(variant) + "'");
  std::string doc = std::string(kHead) + body;
  std::string title = description.empty() ? std::string(content_id) : std::string(description);
  std::string desc = std::string(kind) + ": " + title;
  replace_all(desc, "\\", "\\\\");
  replace_all(desc, "\"", "\\\"");
  replace_all(doc, "{{TITLE}}", escape_html(title));
  replace_all(doc, "{{ID}}", std::string(content_id).empty() ? "content" : std::string(content_id));
  replace_all(doc, "{{REV}}", std::to_string(revision));
  replace_all(doc, "{{DESC}}", escape_html(desc));
  replace_all(doc, "{{HUE}}", std::to_string(fnv1a64(content_id) % 360));
  return doc;
}

TemplateCoder::TemplateCoder(std::string name) : TemplateCoder(std::move(name), Options{}) {}

TemplateCoder::TemplateCoder(std::string name, Options options)
    : ModelClient(std::move(name), Capability::text_only, {}), options_(std::move(options)) {
  if (options_.variants.empty()) throw ValidationError("template_coder needs at least one variant");
}

std::string TemplateCoder::complete(const ChatRequest& request) {
  const auto text = request.messages.back().text();

  if (text.find("SELECTED:") != std::string::npos) {
    std::string out = "SELECTED:\n";
    auto items = listed_items(text, ' ');
    for (std::size_t i = 0; i < items.size() && i < 10; ++i) out += items[i] + "\n";
    return out + "END\n";
  }
  if (text.find("PACKS:") != std::string::npos) {
    auto items = listed_items(text, ':');
    std::string out = "PACKS: ";
    for (std::size_t i = 0; i < items.size() && i < 3; ++i) out += (i ? ", " : "") + items[i];
    return out + "\n";
  }

  const bool improving = text.find("# Current code") != std::string::npos;
  std::string variant;
  int revision = 0;
  if (improving) {
    variant = options_.improve_variant;
    const auto it = field(text, "Iteration");
    revision = it.empty() ? 1 : std::atoi(it.c_str());
  } else {
    const auto n = static_cast<std::int64_t>(options_.variants.size());
    variant = options_.variants[static_cast<std::size_t>(((request.seed % n) + n) % n)];
  }
  if (options_.inject_error) variant = "error";
  const auto doc =
      render_template(variant, field(text, "Content id"), field(text, "Content type"), field(text, "Description"),
                      revision);
  return "Here is the complete document.\n\n```html\n" + doc + "```\n";
}

// --------------------------------------------------------------- factory

ClientPtr make_mock(MockKind kind, const nlohmann::json& params) {
  const auto name = params.value("name", std::string(to_string(kind)));
  switch (kind) {
    case MockKind::scripted: {
      std::vector<std::string> replies = params.value("replies", std::vector<std::string>{});
      std::map<std::string, std::string> by_hash = params.value("by_hash", std::map<std::string, std::string>{});
      std::optional<std::string> fallback;
      if (params.contains("default")) fallback = params.at("default").get<std::string>();
      const auto capability = parse_capability(params.value("capability", std::string("text_only")));
      return std::make_shared<ScriptedClient>(name, capability, std::move(replies), std::move(by_hash),
                                              std::move(fallback), params.value("fail_first", 0));
    }
    case MockKind::heuristic_judge:
      return std::make_shared<HeuristicJudge>(name);
    case MockKind::template_coder: {
      TemplateCoder::Options opts;
      if (params.contains("variants")) opts.variants = params.at("variants").get<std::vector<std::string>>();
      opts.improve_variant = params.value("improve_variant", opts.improve_variant);
      opts.inject_error = params.value("inject_error", false);
      for (const auto& v : opts.variants) render_template(v, "", "", "", 0);
      render_template(opts.improve_variant, "", "", "", 0);
      return std::make_shared<TemplateCoder>(name, std::move(opts));
    }
  }
  throw ValidationError("unknown mock kind");
}

ClientPtr make_mock(std::string_view kind, const nlohmann::json& params) {
  return make_mock(parse_mock_kind(kind), params);
}

}  // namespace avr::gateway
