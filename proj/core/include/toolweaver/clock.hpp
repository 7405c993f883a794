#pragma once

#include <chrono>
#include <mutex>

namespace toolweaver {

/// Time source used by rate limiting, backoff and latency measurement, so tests can
/// substitute virtual time.
class Clock {
public:
    using duration = std::chrono::nanoseconds;
    using time_point = std::chrono::time_point<std::chrono::steady_clock, duration>;

    virtual ~Clock() = default;
    virtual time_point now() = 0;
    virtual void sleep_for(duration d) = 0;
    void sleep_until(time_point t) {
        const auto current = now();
        if (t > current) sleep_for(t - current);
    }
};

class SteadyClock final : public Clock {
public:
    time_point now() override { return std::chrono::steady_clock::now(); }
    void sleep_for(duration d) override;
};

/// Virtual clock: sleeping advances time instantly.
class SimulatedClock final : public Clock {
public:
    time_point now() override {
        std::lock_guard lock(mutex_);
        return current_;
    }
    void sleep_for(duration d) override { advance(d); }
    void advance(duration d) {
        std::lock_guard lock(mutex_);
        current_ += d;
    }

private:
    std::mutex mutex_;
    time_point current_{};
};

/// Process-wide real clock.
Clock& steady_clock();

inline double to_seconds(Clock::duration d) {
    return std::chrono::duration<double>(d).count();
}

inline Clock::duration from_seconds(double s) {
    return std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(s));
}

} // namespace toolweaver
