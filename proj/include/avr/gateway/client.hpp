#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "avr/core/errors.hpp"
#include "avr/core/run_handle.hpp"
#include "avr/gateway/clock.hpp"
#include "avr/gateway/message.hpp"

namespace avr::gateway {

/// Media part sent to a text_only client.
class CapabilityError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Prompt or reply larger than the client's declared limits.
class TokenLimitError : public RuntimeFailure {
 public:
  using RuntimeFailure::RuntimeFailure;
};

/// Thrown by transports for failures worth retrying (timeouts, 429, 5xx).
class TransientError : public RuntimeFailure {
 public:
  using RuntimeFailure::RuntimeFailure;
};

class RetryExhausted : public RuntimeFailure {
 public:
  using RuntimeFailure::RuntimeFailure;
};

struct ClientLimits {
  std::size_t max_prompt_tokens = 1'000'000;
  std::size_t max_reply_tokens = 32'768;
  /// 0 disables rate limiting.
  int requests_per_min = 0;
};

struct ChatRequest {
  std::vector<Message> messages;
  double temperature = 0.0;
  std::int64_t seed = 0;
};

class ModelClient {
 public:
  ModelClient(std::string name, Capability capability, ClientLimits limits);
  virtual ~ModelClient() = default;

  const std::string& name() const { return name_; }
  Capability capability() const { return capability_; }
  const ClientLimits& limits() const { return limits_; }
  RateLimiter& limiter() { return limiter_; }

  /// One transport attempt. Throws TransientError for retryable failures.
  virtual std::string complete(const ChatRequest& request) = 0;
  /// Transcripts carry wall time only for clients that report true, so
  /// offline runs stay byte-identical.
  virtual bool timed() const { return false; }

 private:
  std::string name_;
  Capability capability_;
  ClientLimits limits_;
  RateLimiter limiter_;
};

using ClientPtr = std::shared_ptr<ModelClient>;

struct RetryPolicy {
  int max_retries = 3;
  Millis base_delay{500};
  Millis max_delay{8000};
};

struct Usage {
  std::size_t prompt_tokens = 0;
  std::size_t reply_tokens = 0;
  int attempts = 0;
};

struct ChatReply {
  std::string text;
  Usage usage;
};

/// Where and how a chat call is persisted and paced.
struct ChatContext {
  /// Receives `transcripts/<label>.json`; may be null for throwaway calls.
  ArtifactSink* sink = nullptr;
  std::string label;
  Clock* clock = nullptr;
  RetryPolicy retry;
};

/// Validates, rate limits, retries and writes exactly one transcript, also
/// when the call fails.
ChatReply chat(ModelClient& client, const ChatRequest& request, const ChatContext& ctx);

}  // namespace avr::gateway
