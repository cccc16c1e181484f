#include <chrono>
#include <cstdlib>
#include <semaphore>
#include <sstream>
#include <thread>

#include <unistd.h>

#include <spdlog/spdlog.h>

#include "avr/core/benchmark.hpp"
#include "avr/core/errors.hpp"
#include "avr/core/io.hpp"
#include "avr/media/media.hpp"
#include "avr/recorder/loopback_server.hpp"
#include "avr/recorder/recorder.hpp"
#include "cdp_pipe.hpp"

namespace avr::recorder {

using namespace std::chrono_literals;
using Ms = std::chrono::milliseconds;

fs::path find_browser() {
  if (const char* env = std::getenv("AVR_BROWSER"); env && *env) {
    fs::path p(env);
    return fs::exists(p) ? p : fs::path();
  }
  const char* path = std::getenv("PATH");
  if (!path) return {};
  static const char* names[] = {"chromium",      "chromium-browser", "google-chrome", "google-chrome-stable",
                                "headless_shell", "chrome"};
  for (const char* name : names) {
    std::stringstream dirs(path);
    std::string dir;
    while (std::getline(dirs, dir, ':')) {
      if (dir.empty()) continue;
      const auto candidate = fs::path(dir) / name;
      std::error_code ec;
      if (fs::is_regular_file(candidate, ec) && ::access(candidate.c_str(), X_OK) == 0) return candidate;
    }
  }
  return {};
}

fs::path find_shim(const fs::path& configured) {
  if (!configured.empty()) return configured;
  if (const char* env = std::getenv("AVR_SHIM_JS"); env && *env) return env;
  return default_data_dir() / "shim" / "avr-shim.js";
}

namespace {

class BrowserRecorder final : public Recorder {
 public:
  explicit BrowserRecorder(BrowserOptions opts) : opts_(std::move(opts)), slots_(std::max(1, opts_.pool_size)) {
    if (opts_.executable.empty()) opts_.executable = find_browser();
    if (opts_.executable.empty())
      throw RuntimeFailure("no headless browser found (set AVR_BROWSER or put chromium on PATH)");
    const auto shim_path = find_shim(opts_.shim_js);
    if (!fs::exists(shim_path))
      throw RuntimeFailure("instrumentation shim not found at " + shim_path.string() + " (set AVR_SHIM_JS)");
    shim_ = io::read_file(shim_path);
  }

  std::string name() const override { return "browser"; }

  RecordResult record(const RecordJob& job) override {
    validate(job.opts);
    if (job.source.empty()) throw ValidationError("cannot record an empty document");
    Slot slot(slots_);
    auto session = server().open_session(job.source, job.serve_root, job.opts);
    Page page(*this, *session, job.opts);
    RecordResult out;
    const bool loaded = page.navigate(Ms(job.opts.load_timeout_ms));
    std::this_thread::sleep_for(Ms(job.opts.start_wait_ms));
    if (!page.auto_start()) {
      out.warnings.push_back("no start button");
      spdlog::warn("recording without start: no start button");
    }
    if (!loaded) out.warnings.push_back("page load timed out");

    page.evaluate("window.__avrShim && window.__avrShim.capture(" +
                  nlohmann::json{{"duration_s", job.opts.duration_s},
                                 {"fps", job.opts.fps},
                                 {"sample_rate", job.opts.audio_sample_rate_hz}}
                      .dump() +
                  ")");
    const auto wait = Ms(static_cast<long>(job.opts.duration_s * 1000)) + Ms(opts_.teardown_slack_ms);
    const bool got = session->wait_media(wait);
    page.flush_logs();
    out.log = session->log();
    page.close();
    server().close_session(session->id());

    if (!got) throw RuntimeFailure("no media received from the page within " + std::to_string(wait.count()) + " ms");
    if (auto diag = session->diagnostic()) throw RuntimeFailure("in-page media encoder failed: " + diag->dump());

    fs::create_directories(job.media_out.parent_path());
    io::write_file_atomic(job.media_out, *session->media());
    const auto stats = media::analyze(job.media_out);
    out.recording.media_path = job.media_out;
    out.recording.duration_s = stats.duration_s;
    out.recording.fps = job.opts.fps;
    out.recording.width = stats.width;
    out.recording.height = stats.height;
    out.recording.has_audio_track = stats.has_audio && session->media_has_audio();
    out.recording.frame_variance = stats.frame_variance;
    out.recording.audio_rms = stats.audio_rms;
    out.recording.flagged = !loaded || !session->media_flags().empty();
    return out;
  }

  ProbeResult probe(std::string_view source, const fs::path& serve_root, int budget_ms) override {
    if (source.empty()) throw ValidationError("cannot probe an empty document");
    if (budget_ms <= 0) throw ValidationError("probe budget must be positive");
    Slot slot(slots_);
    RecordOptions opts;
    opts.load_timeout_ms = budget_ms;
    auto session = server().open_session(std::string(source), serve_root, opts);
    Page page(*this, *session, opts);
    const auto started = std::chrono::steady_clock::now();
    ProbeResult r;
    r.loaded = page.navigate(Ms(budget_ms));
    const auto spent = std::chrono::duration_cast<Ms>(std::chrono::steady_clock::now() - started);
    if (spent < Ms(budget_ms)) std::this_thread::sleep_for(Ms(budget_ms) - spent);
    page.flush_logs();
    const auto log = session->log();
    page.close();
    server().close_session(session->id());
    r.error_count = log.error_count();
    r.warn_count = log.warn_count();
    return r;
  }

 private:
  struct Slot {
    explicit Slot(std::counting_semaphore<64>& s) : sem(s) { sem.acquire(); }
    ~Slot() { sem.release(); }
    std::counting_semaphore<64>& sem;
  };

  // One browser context and tab for one capture session.
  class Page {
   public:
    Page(BrowserRecorder& owner, CaptureSession& session, const RecordOptions& opts)
        : cdp_(owner.pipe()), session_(session), url_(owner.server().document_url(session)) {
      context_ = cdp_.call("Target.createBrowserContext")["browserContextId"].get<std::string>();
      target_ = cdp_.call("Target.createTarget", {{"url", "about:blank"}, {"browserContextId", context_}})["targetId"]
                    .get<std::string>();
      sid_ = cdp_.call("Target.attachToTarget", {{"targetId", target_}, {"flatten", true}})["sessionId"]
                 .get<std::string>();
      cdp_.call("Page.enable", {}, sid_);
      cdp_.call("Runtime.enable", {}, sid_);
      cdp_.call("Emulation.setDeviceMetricsOverride",
                {{"width", opts.width_px}, {"height", opts.height_px}, {"deviceScaleFactor", 1}, {"mobile", false}},
                sid_);
      const std::string prelude = "window.__AVR_SESSION__ = " + nlohmann::json(session.id()).dump() +
                                  "; window.__AVR_ORIGIN__ = " + nlohmann::json(owner.server().origin()).dump() + ";\n";
      cdp_.call("Page.addScriptToEvaluateOnNewDocument", {{"source", prelude + owner.shim_}}, sid_);
    }

    ~Page() { close(); }

    bool navigate(Ms timeout) {
      cdp_.call("Page.navigate", {{"url", url_}}, sid_);
      return cdp_.wait_event("Page.loadEventFired", sid_, timeout).has_value();
    }

    nlohmann::json evaluate(const std::string& expr, bool await_promise = false) {
      auto r = cdp_.call("Runtime.evaluate",
                         {{"expression", expr}, {"returnByValue", true}, {"awaitPromise", await_promise}}, sid_);
      return r.value("result", nlohmann::json::object()).value("value", nlohmann::json());
    }

    // Trusted click on #start-button; Enter on the focused button if it is
    // still visible afterwards. False when there is no button.
    bool auto_start() {
      static const char* locate = R"((() => {
        const b = document.getElementById('start-button');
        if (!b) return null;
        const r = b.getBoundingClientRect();
        const s = getComputedStyle(b);
        const visible = r.width > 0 && r.height > 0 && s.display !== 'none' && s.visibility !== 'hidden';
        return {x: r.left + r.width / 2, y: r.top + r.height / 2, visible};
      })())";
      auto where = evaluate(locate);
      if (!where.is_object()) return false;
      if (where.value("visible", false)) {
        const double x = where.value("x", 0.0);
        const double y = where.value("y", 0.0);
        for (const char* type : {"mousePressed", "mouseReleased"})
          cdp_.call("Input.dispatchMouseEvent",
                    {{"type", type}, {"x", x}, {"y", y}, {"button", "left"}, {"clickCount", 1}}, sid_);
      }
      std::this_thread::sleep_for(100ms);
      auto again = evaluate(locate);
      if (again.is_object() && again.value("visible", false)) {
        evaluate("document.getElementById('start-button').focus()");
        for (const char* type : {"keyDown", "keyUp"})
          cdp_.call("Input.dispatchKeyEvent",
                    {{"type", type}, {"key", "Enter"}, {"code", "Enter"}, {"windowsVirtualKeyCode", 13}}, sid_);
      }
      return true;
    }

    void flush_logs() {
      try {
        evaluate("window.__avrShim ? window.__avrShim.flush() : null", true);
      } catch (const std::exception& e) {
        spdlog::warn("log flush failed: {}", e.what());
      }
    }

    void close() {
      if (closed_) return;
      closed_ = true;
      try {
        cdp_.call("Target.closeTarget", {{"targetId", target_}});
        cdp_.call("Target.disposeBrowserContext", {{"browserContextId", context_}});
      } catch (const std::exception& e) {
        spdlog::warn("browser context teardown: {}", e.what());
      }
    }

   private:
    detail::CdpPipe& cdp_;
    CaptureSession& session_;
    std::string url_;
    std::string context_;
    std::string target_;
    std::string sid_;
    bool closed_ = false;
  };

  detail::CdpPipe& pipe() {
    std::lock_guard lock(mu_);
    if (!pipe_) pipe_ = std::make_unique<detail::CdpPipe>(opts_.executable, std::vector<std::string>{});
    return *pipe_;
  }

  LoopbackServer& server() {
    std::lock_guard lock(mu_);
    if (!server_) server_ = std::make_unique<LoopbackServer>();
    return *server_;
  }

  BrowserOptions opts_;
  std::string shim_;
  std::counting_semaphore<64> slots_;
  std::mutex mu_;
  std::unique_ptr<LoopbackServer> server_;
  std::unique_ptr<detail::CdpPipe> pipe_;
};

}  // namespace

RecorderPtr make_browser_recorder(BrowserOptions options) {
  return std::make_shared<BrowserRecorder>(std::move(options));
}

RecorderPtr make_recorder(std::string_view kind, BrowserOptions options) {
  if (kind == "simulated") return std::make_shared<SimulatedRecorder>();
  if (kind == "browser") return make_browser_recorder(std::move(options));
  if (kind == "auto") {
    if (options.executable.empty()) options.executable = find_browser();
    if (!options.executable.empty() && fs::exists(find_shim(options.shim_js)))
      return make_browser_recorder(std::move(options));
    spdlog::info("no browser or shim available; using the simulated recorder");
    return std::make_shared<SimulatedRecorder>();
  }
  throw ValidationError("unknown recorder '" + std::string(kind) + "' (expected simulated|browser|auto)");
}

}  // namespace avr::recorder
