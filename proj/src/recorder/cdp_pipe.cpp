#include "cdp_pipe.hpp"

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <random>

#include "avr/core/errors.hpp"

extern char** environ;

namespace avr::recorder::detail {

namespace {

constexpr std::size_t kMaxBufferedEvents = 20000;

std::filesystem::path make_profile_dir() {
  std::random_device rd;
  auto dir = std::filesystem::temp_directory_path() / ("avr-profile-" + std::to_string(::getpid()) + "-" +
                                                       std::to_string(rd()));
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

CdpPipe::CdpPipe(const std::filesystem::path& executable, std::vector<std::string> extra_args) {
  int to_browser[2];
  int from_browser[2];
  if (::pipe(to_browser) != 0 || ::pipe(from_browser) != 0)
    throw RuntimeFailure(std::string("pipe: ") + std::strerror(errno));
  profile_dir_ = make_profile_dir();

  std::vector<std::string> args{executable.string(),
                                "--headless=new",
                                "--remote-debugging-pipe",
                                "--no-first-run",
                                "--no-default-browser-check",
                                "--no-sandbox",
                                "--disable-gpu",
                                "--disable-dev-shm-usage",
                                "--disable-background-timer-throttling",
                                "--disable-renderer-backgrounding",
                                "--mute-audio",
                                "--user-data-dir=" + profile_dir_.string(),
                                "about:blank"};
  args.insert(args.end() - 1, extra_args.begin(), extra_args.end());
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, to_browser[0], 3);
  posix_spawn_file_actions_adddup2(&actions, from_browser[1], 4);
  posix_spawn_file_actions_addopen(&actions, 1, "/dev/null", O_WRONLY, 0);
  posix_spawn_file_actions_addopen(&actions, 2, "/dev/null", O_WRONLY, 0);
  const int rc = posix_spawn(&pid_, args[0].c_str(), &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(to_browser[0]);
  ::close(from_browser[1]);
  if (rc != 0) {
    ::close(to_browser[1]);
    ::close(from_browser[0]);
    throw RuntimeFailure("cannot launch browser " + executable.string() + ": " + std::strerror(rc));
  }
  write_fd_ = to_browser[1];
  read_fd_ = from_browser[0];
  ::fcntl(write_fd_, F_SETFD, FD_CLOEXEC);
  ::fcntl(read_fd_, F_SETFD, FD_CLOEXEC);
  reader_ = std::thread([this] { reader(); });
}

CdpPipe::~CdpPipe() {
  try {
    call("Browser.close", nlohmann::json::object(), {}, std::chrono::milliseconds(3000));
  } catch (...) {
  }
  if (write_fd_ >= 0) ::close(write_fd_);
  bool exited = false;
  for (int i = 0; i < 50 && !exited; ++i) {
    int status = 0;
    exited = ::waitpid(pid_, &status, WNOHANG) == pid_;
    if (!exited) ::usleep(100'000);
  }
  if (!exited) {
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
  }
  if (reader_.joinable()) reader_.join();
  if (read_fd_ >= 0) ::close(read_fd_);
  std::error_code ec;
  std::filesystem::remove_all(profile_dir_, ec);
}

void CdpPipe::reader() {
  std::string buf;
  char chunk[65536];
  for (;;) {
    const auto n = ::read(read_fd_, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    buf.append(chunk, static_cast<std::size_t>(n));
    std::size_t start = 0;
    for (auto nul = buf.find('\0', start); nul != std::string::npos; nul = buf.find('\0', start)) {
      auto msg = nlohmann::json::parse(buf.begin() + static_cast<std::ptrdiff_t>(start),
                                       buf.begin() + static_cast<std::ptrdiff_t>(nul), nullptr, false);
      start = nul + 1;
      if (msg.is_discarded()) continue;
      std::lock_guard lock(mu_);
      if (msg.contains("id"))
        replies_[msg["id"].get<std::int64_t>()] = std::move(msg);
      else {
        events_.push_back(std::move(msg));
        if (events_.size() > kMaxBufferedEvents) events_.pop_front();
      }
      cv_.notify_all();
    }
    buf.erase(0, start);
  }
  std::lock_guard lock(mu_);
  closed_ = true;
  cv_.notify_all();
}

void CdpPipe::send(const nlohmann::json& msg) {
  auto text = msg.dump();
  text.push_back('\0');
  std::size_t off = 0;
  while (off < text.size()) {
    const auto n = ::write(write_fd_, text.data() + off, text.size() - off);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw RuntimeFailure("browser pipe closed");
    off += static_cast<std::size_t>(n);
  }
}

nlohmann::json CdpPipe::call(const std::string& method, nlohmann::json params, const std::string& session,
                             std::chrono::milliseconds timeout) {
  std::int64_t id;
  {
    std::lock_guard lock(mu_);
    if (closed_) throw RuntimeFailure("browser exited");
    id = next_id_++;
  }
  nlohmann::json msg{{"id", id}, {"method", method}, {"params", std::move(params)}};
  if (!session.empty()) msg["sessionId"] = session;
  send(msg);
  std::unique_lock lock(mu_);
  if (!cv_.wait_for(lock, timeout, [&] { return replies_.count(id) || closed_; }))
    throw RuntimeFailure("DevTools call " + method + " timed out");
  if (!replies_.count(id)) throw RuntimeFailure("browser exited during " + method);
  auto reply = std::move(replies_[id]);
  replies_.erase(id);
  if (reply.contains("error"))
    throw RuntimeFailure("DevTools " + method + " failed: " + reply["error"].value("message", reply["error"].dump()));
  return reply.value("result", nlohmann::json::object());
}

std::optional<nlohmann::json> CdpPipe::wait_event(const std::string& method, const std::string& session,
                                                  std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  std::optional<nlohmann::json> found;
  auto match = [&] {
    for (auto it = events_.begin(); it != events_.end(); ++it) {
      if (it->value("method", std::string()) != method) continue;
      if (!session.empty() && it->value("sessionId", std::string()) != session) continue;
      found = std::move(*it);
      events_.erase(it);
      return true;
    }
    return closed_;
  };
  cv_.wait_for(lock, timeout, match);
  return found;
}

}  // namespace avr::recorder::detail
