#include "avr/gateway/remote.hpp"

#include <openssl/evp.h>

#include <cstdlib>
#include <httplib.h>

#include "avr/core/hash.hpp"
#include "avr/core/io.hpp"
#include "avr/media/media.hpp"

namespace avr::gateway {

namespace {

std::atomic<bool> g_denied{false};
std::atomic<std::size_t> g_attempts{0};

std::string base64(std::string_view bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

struct SplitUrl {
  std::string origin;
  std::string prefix;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ValidationError("base_url '" + url + "' lacks a scheme");
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, ""};
  std::string prefix = url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, slash), prefix};
}

fs::path media_cache_dir() { return fs::temp_directory_path() / "avr-media-cache"; }

}  // namespace

void NetworkPolicy::deny(bool on) { g_denied = on; }
bool NetworkPolicy::denied() { return g_denied; }
std::size_t NetworkPolicy::attempts() { return g_attempts; }
void NetworkPolicy::note_attempt() { ++g_attempts; }

OpenAICompatClient::OpenAICompatClient(RemoteEndpoint endpoint)
    : ModelClient(endpoint.name, endpoint.capability, endpoint.limits), endpoint_(std::move(endpoint)) {
  split_url(endpoint_.base_url);
}

std::string OpenAICompatClient::encode_media(const MediaPart& part) {
  const auto src = fs::absolute(part.path);
  const auto key = fnv1a64_hex(src.string() + "|" + std::to_string(fs::file_size(src)) + "|" +
                               std::to_string(endpoint_.media_fps) + "|" +
                               std::to_string(endpoint_.media_sample_rate_hz));
  fs::create_directories(media_cache_dir());
  if (part.kind == MediaPart::Kind::video) {
    const auto out = media_cache_dir() / (key + ".webm");
    if (!fs::exists(out) && !media::downsample_video(src, out, endpoint_.media_fps))
      throw RuntimeFailure(src.string() + ": recording has no video track");
    return base64(io::read_file(out));
  }
  const auto out = media_cache_dir() / (key + ".wav");
  if (!fs::exists(out) && !media::extract_audio_wav(src, out, endpoint_.media_sample_rate_hz))
    throw RuntimeFailure(src.string() + ": recording has no audio track");
  return base64(io::read_file(out));
}

nlohmann::json OpenAICompatClient::build_body(const ChatRequest& request) {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : request.messages) {
    if (!m.has_media()) {
      messages.push_back({{"role", to_string(m.role)}, {"content", m.text()}});
      continue;
    }
    nlohmann::json content = nlohmann::json::array();
    for (const auto& p : m.parts) {
      if (const auto* t = std::get_if<TextPart>(&p)) {
        content.push_back({{"type", "text"}, {"text", t->text}});
        continue;
      }
      const auto& media = std::get<MediaPart>(p);
      const auto data = encode_media(media);
      if (media.kind == MediaPart::Kind::video)
        content.push_back({{"type", "video_url"}, {"video_url", {{"url", "data:video/webm;base64," + data}}}});
      else
        content.push_back({{"type", "input_audio"}, {"input_audio", {{"data", data}, {"format", "wav"}}}});
    }
    messages.push_back({{"role", to_string(m.role)}, {"content", std::move(content)}});
  }
  return {{"model", endpoint_.model},
          {"messages", std::move(messages)},
          {"temperature", request.temperature},
          {"seed", request.seed},
          {"max_tokens", limits().max_reply_tokens},
          {"stream", false}};
}

std::string OpenAICompatClient::complete(const ChatRequest& request) {
  NetworkPolicy::note_attempt();
  if (NetworkPolicy::denied())
    throw RuntimeFailure("network access denied; client '" + name() + "' cannot reach " + endpoint_.base_url);

  const auto url = split_url(endpoint_.base_url);
  const auto body = build_body(request).dump();
  httplib::Client http(url.origin);
  http.set_connection_timeout(30);
  http.set_read_timeout(endpoint_.timeout_s);
  http.set_write_timeout(endpoint_.timeout_s);
  httplib::Headers headers;
  if (!endpoint_.token_env.empty()) {
    const char* token = std::getenv(endpoint_.token_env.c_str());
    if (!token || !*token) throw ValidationError("environment variable " + endpoint_.token_env + " is not set");
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }
  auto res = http.Post(url.prefix + "/chat/completions", headers, body, "application/json");
  if (!res) throw TransientError("transport error talking to " + endpoint_.base_url + ": " + httplib::to_string(res.error()));
  if (res->status == 429 || res->status >= 500)
    throw TransientError("HTTP " + std::to_string(res->status) + " from " + endpoint_.base_url);
  if (res->status != 200)
    throw RuntimeFailure("HTTP " + std::to_string(res->status) + " from " + endpoint_.base_url + ": " +
                         res->body.substr(0, 500));
  const auto reply = nlohmann::json::parse(res->body, nullptr, false);
  if (reply.is_discarded()) throw TransientError("unparseable reply body from " + endpoint_.base_url);
  try {
    const auto& choice = reply.at("choices").at(0);
    if (choice.value("finish_reason", std::string()) == "length")
      throw TokenLimitError("reply truncated at max_tokens=" + std::to_string(limits().max_reply_tokens) +
                            " by client '" + name() + "'");
    return choice.at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw RuntimeFailure("unexpected reply shape from " + endpoint_.base_url + ": " + e.what());
  }
}

}  // namespace avr::gateway
