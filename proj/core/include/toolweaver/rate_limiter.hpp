#pragma once

#include "toolweaver/clock.hpp"

#include <deque>
#include <mutex>

namespace toolweaver {

/// Sliding-window admission: at most `per_minute` acquisitions in any 60-second window.
/// acquire() blocks (via the clock) until a slot frees. A limit of 0 disables limiting.
class RateLimiter {
public:
    RateLimiter(std::size_t per_minute, Clock& clock);

    /// Returns the time admission was granted.
    Clock::time_point acquire();

    std::size_t per_minute() const noexcept { return per_minute_; }

private:
    std::size_t per_minute_;
    Clock& clock_;
    std::mutex mutex_;
    std::deque<Clock::time_point> admitted_;
};

} // namespace toolweaver
