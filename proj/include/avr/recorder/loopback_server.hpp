#pragma once

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include <json.hpp>

#include "avr/core/types.hpp"
#include "avr/recorder/recorder.hpp"

namespace httplib {
class Server;
}

namespace avr::recorder {

/// State of one page being recorded. Fed by the shim endpoints.
class CaptureSession {
 public:
  CaptureSession(std::string id, std::string document, fs::path serve_root, RecordOptions opts);

  const std::string& id() const { return id_; }
  const std::string& document() const { return document_; }
  const fs::path& serve_root() const { return serve_root_; }
  const RecordOptions& opts() const { return opts_; }

  void add_logs(const nlohmann::json& batch);
  void set_media(std::string bytes, bool has_audio, std::string flags);
  void set_diagnostic(nlohmann::json diagnostic);

  ConsoleLog log() const;
  std::size_t log_batches() const;
  /// Blocks until media or a diagnostic arrives. False on timeout.
  bool wait_media(std::chrono::milliseconds timeout);
  std::optional<std::string> media() const;
  bool media_has_audio() const;
  std::string media_flags() const;
  std::optional<nlohmann::json> diagnostic() const;

 private:
  std::string id_;
  std::string document_;
  fs::path serve_root_;
  RecordOptions opts_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  ConsoleLog log_;
  std::size_t batches_ = 0;
  std::optional<std::string> media_;
  bool has_audio_ = false;
  std::string flags_;
  std::optional<nlohmann::json> diagnostic_;
};

/// Static file server bound to 127.0.0.1 on an ephemeral port.
///   GET  /s/<session>/index.html   the document under test
///   GET  /s/<session>/<path>       files below the session's serve root
///   GET  /__avr/config             capture parameters
///   POST /__avr/logs               console batch: [entry...] or {"entries": [...]}
///   POST /__avr/media              encoded media, or a JSON diagnostic
/// Shim requests name their session in the X-AVR-Session header; without
/// it the only open session is assumed.
class LoopbackServer {
 public:
  LoopbackServer();
  ~LoopbackServer();
  LoopbackServer(const LoopbackServer&) = delete;
  LoopbackServer& operator=(const LoopbackServer&) = delete;

  int port() const { return port_; }
  std::string origin() const;

  std::shared_ptr<CaptureSession> open_session(std::string document, fs::path serve_root, RecordOptions opts);
  void close_session(const std::string& id);
  std::string document_url(const CaptureSession& session) const;

 private:
  std::shared_ptr<CaptureSession> resolve(const std::string& header) const;

  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<CaptureSession>> sessions_;
  std::uint64_t next_id_ = 1;
};

}  // namespace avr::recorder
