#pragma once

#include <atomic>
#include <filesystem>
#include <string>

#include "avr/gateway/client.hpp"

namespace avr::gateway {

/// Process-wide switch used by offline tests: while denied, remote clients
/// refuse to open connections. attempts() counts every attempted connection.
class NetworkPolicy {
 public:
  static void deny(bool on);
  static bool denied();
  static std::size_t attempts();
  static void note_attempt();
};

struct RemoteEndpoint {
  std::string name;
  /// e.g. http://127.0.0.1:8000/v1
  std::string base_url;
  std::string model;
  /// Environment variable holding the bearer token; empty for none.
  std::string token_env;
  Capability capability = Capability::text_only;
  ClientLimits limits;
  /// Media is re-encoded for ingestion only; the archived recording is untouched.
  double media_fps = 2.0;
  int media_sample_rate_hz = 16000;
  int timeout_s = 600;
};

/// Chat-completions endpoint speaking the widely used OpenAI-compatible wire
/// format. Video goes as a base64 `video_url` data URL, audio as base64 WAV
/// `input_audio`.
class OpenAICompatClient final : public ModelClient {
 public:
  explicit OpenAICompatClient(RemoteEndpoint endpoint);
  std::string complete(const ChatRequest& request) override;
  bool timed() const override { return true; }
  const RemoteEndpoint& endpoint() const { return endpoint_; }

  /// Request body, exposed for tests.
  nlohmann::json build_body(const ChatRequest& request);

 private:
  std::string encode_media(const MediaPart& part);
  RemoteEndpoint endpoint_;
};

}  // namespace avr::gateway
