#include "toolweaver/clock.hpp"
#include "toolweaver/errors.hpp"
#include "toolweaver/json_util.hpp"
#include "toolweaver/rng.hpp"

#include <numeric>
#include <thread>

namespace toolweaver {

std::string_view to_string(BackendErrorKind kind) {
    switch (kind) {
    case BackendErrorKind::timeout:
        return "timeout";
    case BackendErrorKind::transient:
        return "transient";
    case BackendErrorKind::non_retryable:
        return "non_retryable";
    case BackendErrorKind::retries_exhausted:
        return "retries_exhausted";
    }
    return "unknown";
}

void SteadyClock::sleep_for(duration d) {
    if (d > duration::zero()) std::this_thread::sleep_for(d);
}

Clock& steady_clock() {
    static SteadyClock clock;
    return clock;
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    k = std::min(k, n);
    for (std::size_t i = 0; i < k; ++i) {
        std::swap(pool[i], pool[i + uniform_index(n - i)]);
    }
    pool.resize(k);
    return pool;
}

Rng Rng::fork(std::string_view label) const {
    std::string key = std::to_string(seed_);
    key.push_back('/');
    key.append(label);
    return Rng(fnv1a64(key));
}

} // namespace toolweaver
