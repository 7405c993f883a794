#pragma once

#include "toolweaver/clock.hpp"
#include "toolweaver/gateway.hpp"
#include "toolweaver/rate_limiter.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace toolweaver {

struct LatencySummary {
    std::string source;
    std::size_t requests = 0;
    double mean = 0.0; ///< seconds
    double p50 = 0.0;
    double p95 = 0.0;
    double max = 0.0;
};

/// Nearest-rank percentiles over per-request durations (seconds).
LatencySummary summarize_latencies(std::string source, std::vector<double> durations);

struct LatencyStats {
    LatencySummary target;
    std::optional<LatencySummary> remote;
    std::optional<double> speedup; ///< remote mean / target mean
};

/// Something that can serve one SimRequest synchronously.
class LatencyTarget {
public:
    virtual ~LatencyTarget() = default;
    virtual std::string name() const = 0;
    virtual void call(const SimRequest& request) = 0;
};

/// In-process gateway.
class GatewayTarget final : public LatencyTarget {
public:
    explicit GatewayTarget(std::shared_ptr<Gateway> gateway) : gateway_(std::move(gateway)) {}
    std::string name() const override { return "gateway"; }
    void call(const SimRequest& request) override;

private:
    std::shared_ptr<Gateway> gateway_;
};

/// Running gateway reached over HTTP (POST {base_url}/v1/simulate).
class HttpGatewayTarget final : public LatencyTarget {
public:
    explicit HttpGatewayTarget(std::string base_url, double timeout = 30.0);
    std::string name() const override { return "gateway-http"; }
    void call(const SimRequest& request) override;

private:
    std::string base_url_;
    double timeout_;
};

struct RemoteProfile {
    double latency = 0.92;    ///< seconds of service time per call
    std::size_t rate_limit = 0; ///< requests per minute; 0 = unlimited
};

/// Synthetic remote tool: waits for rate-limit admission, then sleeps `latency`.
class SyntheticRemote final : public LatencyTarget {
public:
    explicit SyntheticRemote(RemoteProfile profile, Clock& clock = steady_clock());
    std::string name() const override { return "remote"; }
    void call(const SimRequest& request) override;

private:
    RemoteProfile profile_;
    Clock& clock_;
    RateLimiter limiter_;
};

/// Issues `workload` against `target` on `concurrency` threads and, when `remote` is given,
/// the same workload against a SyntheticRemote. Per-request time runs from issue to
/// completion, so rate-limit waits count. Throws PreconditionError on an empty workload.
LatencyStats latency_bench(LatencyTarget& target, std::span<const SimRequest> workload,
                           std::size_t concurrency, const std::optional<RemoteProfile>& remote,
                           Clock& clock = steady_clock());

/// Measures one target only.
LatencySummary measure(LatencyTarget& target, std::span<const SimRequest> workload,
                       std::size_t concurrency, Clock& clock = steady_clock());

/// CSV with columns source, mean_s, p50_s, p95_s, max_s, speedup.
void write_latency_csv(const LatencyStats& stats, std::ostream& out);

} // namespace toolweaver
