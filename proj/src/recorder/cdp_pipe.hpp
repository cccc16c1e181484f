#pragma once

#include <sys/types.h>

#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

namespace avr::recorder::detail {

/// Browser process driven through the DevTools protocol over
/// --remote-debugging-pipe: commands on fd 3, replies and events on fd 4,
/// each message terminated by a NUL byte.
class CdpPipe {
 public:
  CdpPipe(const std::filesystem::path& executable, std::vector<std::string> extra_args);
  ~CdpPipe();
  CdpPipe(const CdpPipe&) = delete;
  CdpPipe& operator=(const CdpPipe&) = delete;

  /// Sends a command and waits for its reply; throws RuntimeFailure on a
  /// protocol error, timeout or browser exit.
  nlohmann::json call(const std::string& method, nlohmann::json params = nlohmann::json::object(),
                      const std::string& session = {},
                      std::chrono::milliseconds timeout = std::chrono::milliseconds(30000));

  /// Removes and returns the first buffered or future event with this method
  /// (and session, when given).
  std::optional<nlohmann::json> wait_event(const std::string& method, const std::string& session,
                                           std::chrono::milliseconds timeout);

 private:
  void reader();
  void send(const nlohmann::json& msg);

  pid_t pid_ = -1;
  int write_fd_ = -1;
  int read_fd_ = -1;
  std::filesystem::path profile_dir_;
  std::thread reader_;

  std::mutex mu_;
  std::condition_variable cv_;
  bool closed_ = false;
  std::int64_t next_id_ = 1;
  std::map<std::int64_t, nlohmann::json> replies_;
  std::deque<nlohmann::json> events_;
};

}  // namespace avr::recorder::detail
