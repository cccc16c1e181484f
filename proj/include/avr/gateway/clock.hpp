#pragma once

#include <chrono>
#include <deque>
#include <mutex>

namespace avr::gateway {

using Millis = std::chrono::milliseconds;

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Millis now() const = 0;
  virtual void sleep_for(Millis d) = 0;
};

class SystemClock final : public Clock {
 public:
  Millis now() const override;
  void sleep_for(Millis d) override;
  static SystemClock& instance();
};

/// Simulated time: sleeping advances the clock instantly.
class ManualClock final : public Clock {
 public:
  Millis now() const override;
  void sleep_for(Millis d) override;
  void advance(Millis d) { sleep_for(d); }

 private:
  mutable std::mutex mu_;
  Millis now_{0};
};

/// Admits at most `per_minute` acquisitions in any 60 s window; acquire()
/// sleeps on `clock` until admission. per_minute <= 0 disables limiting.
class RateLimiter {
 public:
  explicit RateLimiter(int per_minute) : per_minute_(per_minute) {}
  void acquire(Clock& clock);
  int per_minute() const { return per_minute_; }

 private:
  int per_minute_;
  std::mutex mu_;
  std::deque<Millis> admitted_;
};

}  // namespace avr::gateway
