#include "toolweaver/latency.hpp"

#include "toolweaver/errors.hpp"

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <thread>

namespace toolweaver {

LatencySummary summarize_latencies(std::string source, std::vector<double> durations) {
    LatencySummary s;
    s.source = std::move(source);
    s.requests = durations.size();
    if (durations.empty()) return s;
    std::sort(durations.begin(), durations.end());
    const auto n = durations.size();
    auto rank = [&](double q) {
        const auto r = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
        return durations[std::clamp<std::size_t>(r, 1, n) - 1];
    };
    s.mean = std::accumulate(durations.begin(), durations.end(), 0.0) / static_cast<double>(n);
    s.p50 = rank(0.50);
    s.p95 = rank(0.95);
    s.max = durations.back();
    return s;
}

void GatewayTarget::call(const SimRequest& request) { gateway_->simulate(request); }

HttpGatewayTarget::HttpGatewayTarget(std::string base_url, double timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {
    while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

void HttpGatewayTarget::call(const SimRequest& request) {
    httplib::Client client(base_url_);
    const auto secs = static_cast<time_t>(timeout_);
    const auto usecs = static_cast<time_t>((timeout_ - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    const auto res = client.Post("/v1/simulate", to_json(request).dump(), "application/json");
    if (!res) throw IoError("gateway unreachable at " + base_url_ + ": " + httplib::to_string(res.error()));
    if (res->status != 200) {
        throw IoError("gateway returned HTTP " + std::to_string(res->status) + ": " + res->body);
    }
}

SyntheticRemote::SyntheticRemote(RemoteProfile profile, Clock& clock)
    : profile_(profile), clock_(clock), limiter_(profile.rate_limit, clock) {
    if (profile_.latency < 0.0) throw PreconditionError("remote latency must be non-negative");
}

void SyntheticRemote::call(const SimRequest&) {
    limiter_.acquire();
    clock_.sleep_for(from_seconds(profile_.latency));
}

LatencySummary measure(LatencyTarget& target, std::span<const SimRequest> workload, std::size_t concurrency,
                       Clock& clock) {
    if (workload.empty()) throw PreconditionError("latency workload is empty");
    std::vector<double> durations(workload.size());
    std::vector<std::exception_ptr> errors(workload.size());
    std::atomic<std::size_t> next{0};
    auto drain = [&] {
        for (std::size_t i = next++; i < workload.size(); i = next++) {
            const auto start = clock.now();
            try {
                target.call(workload[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
            durations[i] = to_seconds(clock.now() - start);
        }
    };
    const std::size_t threads = std::clamp<std::size_t>(concurrency, 1, workload.size());
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(drain);
        drain();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return summarize_latencies(target.name(), std::move(durations));
}

LatencyStats latency_bench(LatencyTarget& target, std::span<const SimRequest> workload, std::size_t concurrency,
                           const std::optional<RemoteProfile>& remote, Clock& clock) {
    LatencyStats stats;
    stats.target = measure(target, workload, concurrency, clock);
    if (remote) {
        SyntheticRemote synthetic(*remote, clock);
        stats.remote = measure(synthetic, workload, concurrency, clock);
        if (stats.target.mean > 0.0) stats.speedup = stats.remote->mean / stats.target.mean;
    }
    return stats;
}

void write_latency_csv(const LatencyStats& stats, std::ostream& out) {
    auto row = [&](const LatencySummary& s, const std::optional<double>& speedup) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.6f,%.6f,", s.source.c_str(), s.mean, s.p50, s.p95, s.max);
        out << buf;
        if (speedup) {
            std::snprintf(buf, sizeof buf, "%.3f", *speedup);
            out << buf;
        }
        out << '\n';
    };
    out << "source,mean_s,p50_s,p95_s,max_s,speedup\n";
    row(stats.target, stats.speedup);
    if (stats.remote) row(*stats.remote, std::nullopt);
}

} // namespace toolweaver
