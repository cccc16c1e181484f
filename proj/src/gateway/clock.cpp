#include "avr/gateway/clock.hpp"

#include <thread>

namespace avr::gateway {

Millis SystemClock::now() const {
  return std::chrono::duration_cast<Millis>(std::chrono::steady_clock::now().time_since_epoch());
}

void SystemClock::sleep_for(Millis d) { std::this_thread::sleep_for(d); }

SystemClock& SystemClock::instance() {
  static SystemClock clock;
  return clock;
}

Millis ManualClock::now() const {
  std::lock_guard lock(mu_);
  return now_;
}

void ManualClock::sleep_for(Millis d) {
  std::lock_guard lock(mu_);
  now_ += d;
}

void RateLimiter::acquire(Clock& clock) {
  if (per_minute_ <= 0) return;
  constexpr Millis window{60'000};
  for (;;) {
    Millis wait{0};
    {
      std::lock_guard lock(mu_);
      const auto now = clock.now();
      while (!admitted_.empty() && now - admitted_.front() >= window) admitted_.pop_front();
      if (static_cast<int>(admitted_.size()) < per_minute_) {
        admitted_.push_back(now);
        return;
      }
      wait = admitted_.front() + window - now;
    }
    clock.sleep_for(wait);
  }
}

}  // namespace avr::gateway
