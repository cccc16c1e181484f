#include <doctest.h>

#include <httplib.h>

#include "avr/core/io.hpp"
#include "avr/media/media.hpp"
#include "avr/recorder/loopback_server.hpp"
#include "avr/recorder/recorder.hpp"
#include "avr/recorder/run_io.hpp"
#include "support.hpp"

using namespace avr;
using namespace avr::recorder;

namespace {

RecordOptions quick() {
  RecordOptions o;
  o.duration_s = 2;
  o.fps = 10;
  o.width_px = 160;
  o.height_px = 120;
  o.audio_sample_rate_hz = 22050;
  o.start_wait_ms = 1000;
  return o;
}

std::string page(const std::string& name) { return io::read_file(test::fixture("pages/" + name + ".html")); }

RecordResult simulate(const std::string& name, const test::TempDir& dir) {
  SimulatedRecorder rec;
  return rec.record({page(name), {}, dir / (name + ".webm"), quick()});
}

}  // namespace

TEST_CASE("simulated recorder: moving page with beeps after start") {
  test::TempDir dir("rec");
  const auto r = simulate("beeping_moving", dir);
  CHECK(r.log.error_count() == 0);
  CHECK(r.recording.has_audio_track);
  CHECK(r.recording.audio_rms > 0.01);
  CHECK(r.recording.frame_variance > 1.0);
  CHECK_FALSE(r.recording.flagged);
  const auto stats = media::analyze(r.recording.media_path);
  CHECK(stats.duration_s == doctest::Approx(2.0).epsilon(0.1));
  CHECK(stats.width == 160);
  CHECK(stats.audio_rms == doctest::Approx(r.recording.audio_rms).epsilon(0.01));
}

TEST_CASE("simulated recorder: throw inside the start handler") {
  test::TempDir dir("rec");
  const auto r = simulate("throw_in_start", dir);
  REQUIRE(r.log.error_count() == 1);
  const auto& e = r.log.entries.back();
  CHECK(e.level == LogLevel::error);
  CHECK(e.source == LogSource::unhandled_exception);
  CHECK(e.t_ms == 1000);
  CHECK(r.recording.audio_rms == doctest::Approx(0.0));
  CHECK(r.recording.frame_variance > 1.0);
}

TEST_CASE("simulated recorder: audio begins only after the start click") {
  test::TempDir dir("rec");
  const auto r = simulate("audio_after_start", dir);
  CHECK(r.recording.audio_rms > 0.0);
  CHECK(r.recording.frame_variance < 0.01);
  const auto pred = SimulatedRecorder::predict(page("audio_after_start"), quick());
  CHECK(pred.has_start_button);
  CHECK(pred.audio);
  CHECK_FALSE(pred.motion);
}

TEST_CASE("simulated recorder: blank page, top-level throw, syntax error") {
  test::TempDir dir("rec");
  const auto blank = simulate("blank", dir);
  CHECK(blank.warnings == std::vector<std::string>{"no start button"});
  CHECK(blank.recording.audio_rms == doctest::Approx(0.0));

  const auto top = simulate("toplevel_throw", dir);
  REQUIRE(top.log.entries.size() == 2);
  CHECK(top.log.entries[0].level == LogLevel::warn);
  CHECK(top.log.entries[1].level == LogLevel::error);
  CHECK(top.log.entries[1].t_ms == 0);

  const auto syn = simulate("broken_syntax", dir);
  REQUIRE(syn.log.error_count() == 1);
  CHECK(syn.log.entries[0].message == "Uncaught SyntaxError: Unexpected end of input");
}

TEST_CASE("simulated recorder predicts one entry per call site, without unrolling loops") {
  test::TempDir dir("rec");
  const auto r = simulate("console_burst", dir);
  REQUIRE(r.log.entries.size() == 1);
  CHECK(r.log.entries[0].level == LogLevel::log);
  CHECK(r.log.entries[0].t_ms == 0);
}

TEST_CASE("simulated recordings are byte-deterministic") {
  test::TempDir a("rec"), b("rec");
  simulate("beeping_moving", a);
  simulate("beeping_moving", b);
  CHECK(io::read_file(a / "beeping_moving.webm") == io::read_file(b / "beeping_moving.webm"));
}

TEST_CASE("console log normalize is a stable sort by time") {
  auto g = test::rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    ConsoleLog log;
    const int n = test::uniform(g, 0, 40);
    for (int i = 0; i < n; ++i)
      log.entries.push_back({LogLevel::log, std::to_string(i), test::uniform(g, 0, 5), LogSource::console});
    auto sorted = log;
    sorted.normalize();
    REQUIRE(sorted.entries.size() == log.entries.size());
    for (std::size_t i = 1; i < sorted.entries.size(); ++i) {
      const auto& p = sorted.entries[i - 1];
      const auto& q = sorted.entries[i];
      CHECK(p.t_ms <= q.t_ms);
      if (p.t_ms == q.t_ms) CHECK(std::stoi(p.message) < std::stoi(q.message));
    }
    CHECK(ConsoleLog::from_jsonl(sorted.to_jsonl()).entries == sorted.entries);
  }
}

TEST_CASE("console log counts") {
  ConsoleLog log;
  log.entries = {{LogLevel::error, "a", 0, LogSource::console},
                 {LogLevel::warn, "b", 1, LogSource::console},
                 {LogLevel::error, "c", 2, LogSource::unhandled_exception},
                 {LogLevel::log, "d", 3, LogSource::console}};
  CHECK(log.error_count() == 2);
  CHECK(log.warn_count() == 1);
}

TEST_CASE("loopback server serves the document and accepts shim posts") {
  test::TempDir root("srv");
  io::write_file_atomic(root / "assets/pack/a.txt", "asset");
  LoopbackServer server;
  auto s = server.open_session("<html>doc</html>", root.path(), quick());
  httplib::Client http(server.origin());

  auto doc = http.Get("/s/" + s->id() + "/index.html");
  REQUIRE(doc);
  CHECK(doc->body == "<html>doc</html>");
  auto asset = http.Get("/s/" + s->id() + "/assets/pack/a.txt");
  REQUIRE(asset);
  CHECK(asset->body == "asset");
  auto escape = http.Get("/s/" + s->id() + "/../../etc/passwd");
  REQUIRE(escape);
  CHECK(escape->status == 404);

  auto cfg = http.Get("/__avr/config");
  REQUIRE(cfg);
  const auto c = json::parse(cfg->body);
  CHECK(c.at("session") == s->id());
  CHECK(c.at("fps") == 10);
  CHECK(c.at("start_wait_ms") == 1000);

  auto ok = http.Post("/__avr/logs", R"([{"level":"error","message":"x","t_ms":5,"source":"console"}])",
                      "application/json");
  REQUIRE(ok);
  CHECK(ok->status == 204);
  auto wrapped = http.Post("/__avr/logs", R"({"entries":[{"level":"warn","message":"y","t_ms":1}]})",
                           "application/json");
  REQUIRE(wrapped);
  CHECK(wrapped->status == 204);
  auto bad = http.Post("/__avr/logs", "not json", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  CHECK(s->log().entries.size() == 2);
  CHECK(s->log().error_count() == 1);

  httplib::Headers h{{"X-AVR-Session", s->id()}, {"X-AVR-Has-Audio", "1"}};
  auto media = http.Post("/__avr/media", h, std::string("WEBMDATA"), "video/webm");
  REQUIRE(media);
  CHECK(media->status == 204);
  CHECK(s->wait_media(std::chrono::milliseconds(100)));
  CHECK(*s->media() == "WEBMDATA");
  CHECK(s->media_has_audio());

  server.close_session(s->id());
  auto gone = http.Get("/__avr/config");
  REQUIRE(gone);
  CHECK(gone->status == 404);
}

TEST_CASE("record_into stages media and log inside the step") {
  test::TempDir dir("run");
  RunConfig cfg;
  cfg.record_opts = quick();
  auto run = RunHandle::open(dir.path(), cfg, {"s", ContentKind::game, "T", "d"});
  auto tx = run->begin_step("v");
  const auto v = tx.add_version(VersionStage::initial_candidate, 0, std::nullopt, "c", page("throw_in_start"));
  SimulatedRecorder rec;
  const auto stored = record_into(rec, tx, v, quick());
  run->commit(tx, to_step_data(stored, run->dir()));
  CHECK(fs::exists(dir / "recordings/v001.webm"));
  CHECK(fs::exists(dir / "logs/v001.console.jsonl"));
  const auto back = load_stored(*run->step_data("v"), run->dir());
  CHECK(back.log.entries == stored.log.entries);
  CHECK(back.recording.audio_rms == doctest::Approx(stored.recording.audio_rms));
}

TEST_CASE("browser recorder on a fixture page") {
  if (find_browser().empty()) {
    MESSAGE("no browser found; browser recording not exercised");
    return;
  }
  test::TempDir dir("brw");
  auto rec = make_browser_recorder();
  const auto r = rec->record({page("beeping_moving"), {}, dir / "b.webm", quick()});
  CHECK(r.recording.frame_variance > 1.0);
  CHECK(r.recording.audio_rms > 0.0);
}
