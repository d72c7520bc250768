#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <deque>
#include <mutex>

namespace behavior_codec {

class Clock {
 public:
  using duration = std::chrono::steady_clock::duration;
  using time_point = std::chrono::steady_clock::time_point;

  virtual ~Clock() = default;
  [[nodiscard]] virtual time_point now() const = 0;
  virtual void sleep_for(duration d) = 0;
};

class SteadyClock final : public Clock {
 public:
  [[nodiscard]] time_point now() const override { return std::chrono::steady_clock::now(); }
  void sleep_for(duration d) override;
};

/// Manually advanced clock; sleeping advances time instantly.
class ManualClock final : public Clock {
 public:
  [[nodiscard]] time_point now() const override { return time_point(duration(ticks_.load())); }
  void sleep_for(duration d) override { advance(d); }
  void advance(duration d) { ticks_.fetch_add(d.count()); }

 private:
  std::atomic<duration::rep> ticks_{0};
};

/// Sliding-window limiter: at most `limit` acquisitions start within any
/// window of length `window`. acquire() blocks (through the clock) until a
/// slot frees up.
class RateLimiter {
 public:
  RateLimiter(std::size_t limit, Clock::duration window, Clock& clock);

  /// Returns the time at which the slot was granted.
  Clock::time_point acquire();

  [[nodiscard]] std::size_t limit() const noexcept { return limit_; }
  [[nodiscard]] Clock::duration window() const noexcept { return window_; }

 private:
  std::size_t limit_;
  Clock::duration window_;
  Clock& clock_;
  std::mutex mutex_;
  std::deque<Clock::time_point> starts_;
};

}  // namespace behavior_codec
