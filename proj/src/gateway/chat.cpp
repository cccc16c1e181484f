#include <algorithm>
#include <chrono>

#include "avr/gateway/client.hpp"

namespace avr::gateway {

ModelClient::ModelClient(std::string name, Capability capability, ClientLimits limits)
    : name_(std::move(name)), capability_(capability), limits_(limits), limiter_(limits.requests_per_min) {}

namespace {

nlohmann::json request_json(const ModelClient& client, const ChatRequest& req, const fs::path& root) {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : req.messages) messages.push_back(to_json(m, root));
  return {{"client", client.name()},
          {"capability", to_string(client.capability())},
          {"temperature", req.temperature},
          {"seed", req.seed},
          {"messages", std::move(messages)}};
}

void validate(const ModelClient& client, const ChatRequest& req) {
  if (req.messages.empty()) throw ValidationError("chat request has no messages");
  if (client.capability() == Capability::text_only) {
    for (const auto& m : req.messages)
      if (m.has_media())
        throw CapabilityError("client '" + client.name() + "' is text_only but the request carries media parts");
  }
  const auto prompt = estimate_tokens(req.messages);
  if (prompt > client.limits().max_prompt_tokens)
    throw TokenLimitError("prompt of ~" + std::to_string(prompt) + " tokens exceeds the limit of " +
                          std::to_string(client.limits().max_prompt_tokens) + " for client '" + client.name() + "'");
}

}  // namespace

ChatReply chat(ModelClient& client, const ChatRequest& req, const ChatContext& ctx) {
  const auto started = std::chrono::steady_clock::now();
  Clock& clock = ctx.clock ? *ctx.clock : SystemClock::instance();
  ChatReply reply;
  reply.usage.prompt_tokens = estimate_tokens(req.messages);
  std::string error;

  auto persist = [&] {
    if (!ctx.sink) return;
    const auto wall =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();
    nlohmann::json doc{{"request", request_json(client, req, ctx.sink->root())},
                       {"reply", error.empty() ? nlohmann::json(reply.text) : nlohmann::json(nullptr)},
                       {"usage",
                        {{"prompt_tokens", reply.usage.prompt_tokens},
                         {"reply_tokens", reply.usage.reply_tokens},
                         {"attempts", reply.usage.attempts}}},
                       {"attempts", reply.usage.attempts}};
    if (client.timed()) doc["wall_ms"] = wall;
    if (!error.empty()) doc["error"] = error;
    ctx.sink->write(fs::path("transcripts") / (ctx.label + ".json"), doc.dump(2) + "\n");
  };

  try {
    validate(client, req);
    for (int attempt = 0;; ++attempt) {
      client.limiter().acquire(clock);
      ++reply.usage.attempts;
      try {
        reply.text = client.complete(req);
        break;
      } catch (const TransientError& e) {
        if (attempt >= ctx.retry.max_retries)
          throw RetryExhausted("client '" + client.name() + "' failed after " + std::to_string(attempt + 1) +
                               " attempts: " + e.what());
        auto delay = ctx.retry.base_delay * (1LL << attempt);
        clock.sleep_for(std::min<Millis>(delay, ctx.retry.max_delay));
      }
    }
    reply.usage.reply_tokens = (reply.text.size() + 3) / 4;
    if (reply.usage.reply_tokens > client.limits().max_reply_tokens)
      throw TokenLimitError("reply of ~" + std::to_string(reply.usage.reply_tokens) + " tokens exceeds the limit of " +
                            std::to_string(client.limits().max_reply_tokens) + " for client '" + client.name() + "'");
  } catch (const std::exception& e) {
    error = e.what();
    persist();
    throw;
  }
  persist();
  return reply;
}

}  // namespace avr::gateway
