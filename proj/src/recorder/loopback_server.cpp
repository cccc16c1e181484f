#include "avr/recorder/loopback_server.hpp"

#include <httplib.h>

#include "avr/core/errors.hpp"
#include "avr/core/io.hpp"

namespace avr::recorder {

CaptureSession::CaptureSession(std::string id, std::string document, fs::path serve_root, RecordOptions opts)
    : id_(std::move(id)), document_(std::move(document)), serve_root_(std::move(serve_root)), opts_(opts) {}

void CaptureSession::add_logs(const nlohmann::json& batch) {
  const auto& entries = batch.is_object() ? batch.at("entries") : batch;
  if (!entries.is_array()) throw ValidationError("log batch is not an array");
  std::vector<LogEntry> parsed;
  for (const auto& e : entries) parsed.push_back(log_entry_from(e));
  std::lock_guard lock(mu_);
  log_.entries.insert(log_.entries.end(), parsed.begin(), parsed.end());
  ++batches_;
}

void CaptureSession::set_media(std::string bytes, bool has_audio, std::string flags) {
  {
    std::lock_guard lock(mu_);
    media_ = std::move(bytes);
    has_audio_ = has_audio;
    flags_ = std::move(flags);
  }
  cv_.notify_all();
}

void CaptureSession::set_diagnostic(nlohmann::json diagnostic) {
  {
    std::lock_guard lock(mu_);
    diagnostic_ = std::move(diagnostic);
  }
  cv_.notify_all();
}

ConsoleLog CaptureSession::log() const {
  std::lock_guard lock(mu_);
  auto copy = log_;
  copy.normalize();
  return copy;
}

std::size_t CaptureSession::log_batches() const {
  std::lock_guard lock(mu_);
  return batches_;
}

bool CaptureSession::wait_media(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  return cv_.wait_for(lock, timeout, [&] { return media_.has_value() || diagnostic_.has_value(); });
}

std::optional<std::string> CaptureSession::media() const {
  std::lock_guard lock(mu_);
  return media_;
}

bool CaptureSession::media_has_audio() const {
  std::lock_guard lock(mu_);
  return has_audio_;
}

std::string CaptureSession::media_flags() const {
  std::lock_guard lock(mu_);
  return flags_;
}

std::optional<nlohmann::json> CaptureSession::diagnostic() const {
  std::lock_guard lock(mu_);
  return diagnostic_;
}

namespace {

const char* content_type_for(const fs::path& p) {
  static const std::map<std::string, const char*> types{
      {".html", "text/html; charset=utf-8"}, {".js", "text/javascript"}, {".mjs", "text/javascript"},
      {".css", "text/css"},                  {".json", "application/json"}, {".png", "image/png"},
      {".jpg", "image/jpeg"},                {".jpeg", "image/jpeg"},   {".gif", "image/gif"},
      {".webp", "image/webp"},               {".svg", "image/svg+xml"}, {".wav", "audio/wav"},
      {".mp3", "audio/mpeg"},                {".ogg", "audio/ogg"},     {".m4a", "audio/mp4"},
      {".glb", "model/gltf-binary"},         {".gltf", "model/gltf+json"}};
  auto ext = p.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  auto it = types.find(ext);
  return it == types.end() ? "application/octet-stream" : it->second;
}

bool is_inside(const fs::path& root, const fs::path& candidate) {
  const auto r = fs::weakly_canonical(root);
  const auto c = fs::weakly_canonical(candidate);
  auto rit = r.begin();
  auto cit = c.begin();
  for (; rit != r.end(); ++rit, ++cit)
    if (cit == c.end() || *rit != *cit) return false;
  return true;
}

}  // namespace

LoopbackServer::LoopbackServer() : server_(std::make_unique<httplib::Server>()) {
  auto& srv = *server_;
  srv.set_payload_max_length(512ull * 1024 * 1024);

  srv.Get(R"(/s/([^/]+)/(.*))", [this](const httplib::Request& req, httplib::Response& res) {
    std::shared_ptr<CaptureSession> session;
    {
      std::lock_guard lock(mu_);
      auto it = sessions_.find(req.matches[1]);
      if (it != sessions_.end()) session = it->second;
    }
    if (!session) {
      res.status = 404;
      return;
    }
    const std::string rel = req.matches[2];
    if (rel.empty() || rel == "index.html") {
      res.set_content(session->document(), "text/html; charset=utf-8");
      return;
    }
    if (session->serve_root().empty()) {
      res.status = 404;
      return;
    }
    const auto path = session->serve_root() / fs::path(rel).relative_path();
    if (!is_inside(session->serve_root(), path) || !fs::is_regular_file(path)) {
      res.status = 404;
      return;
    }
    res.set_content(io::read_file(path), content_type_for(path));
  });

  srv.Get("/__avr/config", [this](const httplib::Request& req, httplib::Response& res) {
    auto session = resolve(req.get_header_value("X-AVR-Session"));
    if (!session) {
      res.status = 404;
      return;
    }
    const auto& o = session->opts();
    nlohmann::json cfg{{"session", session->id()},          {"duration_s", o.duration_s},
                       {"fps", o.fps},                      {"width", o.width_px},
                       {"height", o.height_px},             {"audio_sample_rate_hz", o.audio_sample_rate_hz},
                       {"start_wait_ms", o.start_wait_ms}};
    res.set_content(cfg.dump(), "application/json");
  });

  srv.Post("/__avr/logs", [this](const httplib::Request& req, httplib::Response& res) {
    auto session = resolve(req.get_header_value("X-AVR-Session"));
    if (!session) {
      res.status = 404;
      return;
    }
    try {
      session->add_logs(nlohmann::json::parse(req.body));
      res.status = 204;
    } catch (const std::exception& e) {
      res.status = 400;
      res.set_content(e.what(), "text/plain");
    }
  });

  srv.Post("/__avr/media", [this](const httplib::Request& req, httplib::Response& res) {
    auto session = resolve(req.get_header_value("X-AVR-Session"));
    if (!session) {
      res.status = 404;
      return;
    }
    if (req.get_header_value("Content-Type").rfind("application/json", 0) == 0) {
      auto diag = nlohmann::json::parse(req.body, nullptr, false);
      session->set_diagnostic(diag.is_discarded() ? nlohmann::json{{"raw", req.body}} : diag);
    } else {
      session->set_media(req.body, req.get_header_value("X-AVR-Has-Audio") == "1",
                         req.get_header_value("X-AVR-Flags"));
    }
    res.status = 204;
  });

  port_ = srv.bind_to_any_port("127.0.0.1");
  if (port_ <= 0) throw RuntimeFailure("cannot bind loopback server");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

LoopbackServer::~LoopbackServer() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string LoopbackServer::origin() const { return "http://127.0.0.1:" + std::to_string(port_); }

std::shared_ptr<CaptureSession> LoopbackServer::open_session(std::string document, fs::path serve_root,
                                                             RecordOptions opts) {
  std::lock_guard lock(mu_);
  auto id = "c" + std::to_string(next_id_++);
  auto session = std::make_shared<CaptureSession>(id, std::move(document), std::move(serve_root), opts);
  sessions_.emplace(id, session);
  return session;
}

void LoopbackServer::close_session(const std::string& id) {
  std::lock_guard lock(mu_);
  sessions_.erase(id);
}

std::string LoopbackServer::document_url(const CaptureSession& session) const {
  return origin() + "/s/" + session.id() + "/index.html";
}

std::shared_ptr<CaptureSession> LoopbackServer::resolve(const std::string& header) const {
  std::lock_guard lock(mu_);
  if (!header.empty()) {
    auto it = sessions_.find(header);
    return it == sessions_.end() ? nullptr : it->second;
  }
  return sessions_.size() == 1 ? sessions_.begin()->second : nullptr;
}

}  // namespace avr::recorder
