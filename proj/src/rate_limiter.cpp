#include "behavior_codec/rate_limiter.hpp"

#include <thread>

#include "behavior_codec/error.hpp"

namespace behavior_codec {

void SteadyClock::sleep_for(duration d) {
  if (d > duration::zero()) std::this_thread::sleep_for(d);
}

RateLimiter::RateLimiter(std::size_t limit, Clock::duration window, Clock& clock)
    : limit_(limit), window_(window), clock_(clock) {
  if (limit_ == 0) throw Error(ErrorKind::PreconditionViolation, "rate limit must be positive");
  if (window_ <= Clock::duration::zero()) {
    throw Error(ErrorKind::PreconditionViolation, "rate window must be positive");
  }
}

Clock::time_point RateLimiter::acquire() {
  std::unique_lock lock(mutex_);
  for (;;) {
    const auto now = clock_.now();
    while (!starts_.empty() && starts_.front() + window_ <= now) starts_.pop_front();
    if (starts_.size() < limit_) {
      starts_.push_back(now);
      return now;
    }
    const auto wait = starts_.front() + window_ - now;
    lock.unlock();
    clock_.sleep_for(wait);
    lock.lock();
  }
}

}  // namespace behavior_codec
