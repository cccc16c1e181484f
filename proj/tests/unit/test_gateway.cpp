#include <doctest.h>

#include <httplib.h>

#include <cstdlib>
#include <thread>

#include "avr/core/io.hpp"
#include "avr/gateway/client.hpp"
#include "avr/gateway/extract.hpp"
#include "avr/gateway/mocks.hpp"
#include "avr/gateway/registry.hpp"
#include "avr/gateway/remote.hpp"
#include "support.hpp"

using namespace avr;
using namespace avr::gateway;

namespace {

ChatRequest ask(std::string text) { return {{Message::user(std::move(text))}, 0.0, 0}; }

json read_json(const fs::path& p) { return json::parse(io::read_file(p)); }

class Fixed final : public ModelClient {
 public:
  Fixed(ClientLimits limits, std::string reply)
      : ModelClient("fixed", Capability::text_only, limits), reply_(std::move(reply)) {}
  std::string complete(const ChatRequest&) override {
    ++calls;
    return reply_;
  }
  int calls = 0;

 private:
  std::string reply_;
};

}  // namespace

TEST_CASE("transient failures back off exponentially and then succeed") {
  test::TempDir dir("gw");
  DirectorySink sink(dir.path());
  ScriptedClient client("s", Capability::text_only, {"ok"}, {}, {}, 2);
  ManualClock clock;
  const auto reply = chat(client, ask("hi"), {&sink, "x", &clock, {3, Millis{500}, Millis{8000}}});
  CHECK(reply.text == "ok");
  CHECK(reply.usage.attempts == 3);
  CHECK(clock.now() == Millis{1500});
  const auto t = read_json(dir / "transcripts/x.json");
  CHECK(t.at("attempts") == 3);
  CHECK(t.at("reply") == "ok");
}

TEST_CASE("backoff is capped and exhaustion still leaves a transcript") {
  test::TempDir dir("gw");
  DirectorySink sink(dir.path());
  ScriptedClient client("s", Capability::text_only, {"ok"}, {}, {}, 10);
  ManualClock clock;
  CHECK_THROWS_AS(chat(client, ask("hi"), {&sink, "y", &clock, {4, Millis{1000}, Millis{3000}}}), RetryExhausted);
  // delays 1000, 2000, 3000, 3000
  CHECK(clock.now() == Millis{9000});
  const auto t = read_json(dir / "transcripts/y.json");
  CHECK(t.at("reply").is_null());
  CHECK(t.at("attempts") == 5);
  CHECK(t.at("error").get<std::string>().find("5 attempts") != std::string::npos);
}

TEST_CASE("media sent to a text-only client is a capability error") {
  test::TempDir dir("gw");
  DirectorySink sink(dir.path());
  ScriptedClient client("t", Capability::text_only, {"never"});
  ChatRequest req = ask("look");
  req.messages[0].parts.push_back(MediaPart{MediaPart::Kind::video, "/nonexistent.webm", "A", {}});
  CHECK_THROWS_AS(chat(client, req, {&sink, "cap", nullptr, {}}), CapabilityError);
  CHECK(client.calls() == 0);
  CHECK(fs::exists(dir / "transcripts/cap.json"));
}

TEST_CASE("prompt and reply token limits") {
  Fixed small({2, 100, 0}, "ok");
  CHECK_THROWS_AS(chat(small, ask("123456789012"), {}), TokenLimitError);
  CHECK(small.calls == 0);
  CHECK(chat(small, ask("12345678"), {}).text == "ok");

  Fixed chatty({100, 10, 0}, std::string(100, 'x'));
  CHECK_THROWS_AS(chat(chatty, ask("hi"), {}), TokenLimitError);
  CHECK(chatty.calls == 1);
}

TEST_CASE("token estimate is ceil(chars / 4)") {
  CHECK(estimate_tokens({Message::user("abcd")}) == 1);
  CHECK(estimate_tokens({Message::user("abcde")}) == 2);
  CHECK(estimate_tokens({Message::user(""), Message::system("abc")}) == 1);
}

TEST_CASE("rate limiter admits at most n per sliding minute") {
  for (int n : {1, 3, 7}) {
    RateLimiter lim(n);
    ManualClock clock;
    std::vector<Millis> times;
    for (int i = 0; i < 4 * n; ++i) {
      lim.acquire(clock);
      times.push_back(clock.now());
      clock.advance(Millis{1});
    }
    for (std::size_t i = static_cast<std::size_t>(n); i < times.size(); ++i)
      CHECK(times[i] - times[i - n] >= Millis{60'000});
  }
  RateLimiter off(0);
  ManualClock clock;
  for (int i = 0; i < 1000; ++i) off.acquire(clock);
  CHECK(clock.now() == Millis{0});
}

TEST_CASE("code extraction") {
  CHECK(extract_code("text\n```html\n<p>a</p>\n```\nmore\n```\n<p>b</p>\n```\n") == "<p>b</p>\n");
  CHECK(extract_code("Sure! <!doctype html><html></html>") == "<!doctype html><html></html>");
  CHECK(extract_code("x <HTML><body></body></HTML>") == "<HTML><body></body></HTML>");
  CHECK_THROWS_AS(extract_code("no code here"), ExtractionError);
  CHECK(extract_code("```\n<p>a</p>\n```\n```\nunterminated") == "<p>a</p>\n");
}

TEST_CASE("scripted replies by prompt hash, then order, then default") {
  const auto hit = ask("special");
  ScriptedClient c("s", Capability::text_only, {"first", "second"}, {{prompt_hash(hit), "hashed"}}, "dflt");
  CHECK(c.complete(ask("a")) == "first");
  CHECK(c.complete(hit) == "hashed");
  CHECK(c.complete(ask("b")) == "second");
  CHECK(c.complete(ask("c")) == "dflt");
  CHECK(c.calls() == 4);
  CHECK(prompt_hash(ask("a")) == prompt_hash(ask("a")));
  CHECK(prompt_hash(ask("a")) != prompt_hash(ask("b")));
}

TEST_CASE("stats tags round-trip and the heuristic ordering is strict") {
  const JudgeHint a{0.1, 700, 0}, b{0.0, 0, 1};
  const auto tags = parse_stats_tags(format_stats_tag("A", a) + " and " + format_stats_tag("B", b));
  REQUIRE(tags.size() == 2);
  CHECK(tags.at("A").audio_rms == doctest::Approx(0.1));
  CHECK(tags.at("B").console_errors == 1);
  CHECK(heuristic_prefers(a, b));
  CHECK_FALSE(heuristic_prefers(b, a));
  CHECK(heuristic_prefers(JudgeHint{0, 0, 0}, JudgeHint{0, 0, 2}));
}

TEST_CASE("template coder reads the prompt header") {
  TemplateCoder coder("c");
  const auto reply = coder.complete(ask("Content id: pong\nContent type: game\nDescription: Pong - paddles\n"));
  const auto doc = extract_code(reply);
  CHECK(doc.find("<html") != std::string::npos);
  CHECK(doc.find("pong") != std::string::npos);
}

TEST_CASE("registry reports unknown names and substitutes mocks when forced") {
  ClientSpec remote;
  remote.name = "big";
  remote.endpoint.name = "big";
  remote.endpoint.model = "m";
  remote.endpoint.base_url = "http://127.0.0.1:9/v1";
  remote.endpoint.capability = Capability::omni;
  ClientRegistry forced({remote}, true);
  CHECK(dynamic_cast<OpenAICompatClient*>(forced.get("big").get()) == nullptr);
  CHECK(forced.get("big")->capability() == Capability::omni);
  ClientRegistry real({remote}, false);
  CHECK(dynamic_cast<OpenAICompatClient*>(real.get("big").get()) != nullptr);
  CHECK_THROWS_AS(real.get("missing"), ValidationError);
}

TEST_CASE("denied network refuses before connecting and counts the attempt") {
  RemoteEndpoint e;
  e.name = "r";
  e.base_url = "http://127.0.0.1:9/v1";
  OpenAICompatClient client(e);
  NetworkPolicy::deny(true);
  const auto before = NetworkPolicy::attempts();
  CHECK_THROWS_AS(chat(client, ask("hi"), {}), RuntimeFailure);
  CHECK(NetworkPolicy::attempts() == before + 1);
  NetworkPolicy::deny(false);
}

TEST_CASE("remote client speaks the chat-completions wire format") {
  httplib::Server server;
  std::atomic<int> hits{0};
  json seen;
  std::string auth;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    if (hits++ == 0) {
      res.status = 429;
      return;
    }
    seen = json::parse(req.body);
    auth = req.get_header_value("Authorization");
    res.set_content(R"({"choices":[{"message":{"content":"pong"},"finish_reason":"stop"}]})", "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ::setenv("AVR_TEST_TOKEN", "secret", 1);
  RemoteEndpoint e;
  e.name = "r";
  e.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  e.model = "m1";
  e.token_env = "AVR_TEST_TOKEN";
  OpenAICompatClient client(e);
  ManualClock clock;
  const auto reply = chat(client, {{Message::system("sys"), Message::user("ping")}, 0.5, 7}, {nullptr, "", &clock, {}});
  server.stop();
  th.join();

  CHECK(reply.text == "pong");
  CHECK(reply.usage.attempts == 2);
  CHECK(seen.at("model") == "m1");
  CHECK(seen.at("seed") == 7);
  CHECK(seen.at("messages").size() == 2);
  CHECK(seen.at("messages")[1].at("content") == "ping");
  CHECK(auth == "Bearer secret");
}
