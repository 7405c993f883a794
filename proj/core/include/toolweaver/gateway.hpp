#pragma once

#include "toolweaver/backend.hpp"
#include "toolweaver/prompts.hpp"
#include "toolweaver/response_cache.hpp"
#include "toolweaver/tool_registry.hpp"
#include "toolweaver/validation.hpp"

#include <atomic>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace toolweaver {

struct HistoryEntry {
    Json call;     ///< arguments (or a full call record) of an earlier invocation
    Json response; ///< what the tool returned

    bool operator==(const HistoryEntry&) const = default;
};

/// One simulated tool execution. Exactly one of `tool` / `tool_id` is set.
struct SimRequest {
    std::optional<ToolSpec> tool;
    std::optional<std::string> tool_id;
    Json arguments = Json::object();
    std::vector<HistoryEntry> history;
    std::optional<std::string> ground_truth_hint;
    std::string request_id;
    std::optional<double> temperature;
};

/// Parses the wire form {tool | tool_id, arguments, history?, ground_truth_hint?,
/// request_id?, temperature?}. Throws ParseError with a diagnostic.
SimRequest sim_request_from_json(const Json& body);
Json to_json(const SimRequest& request);

enum class SimStatus {
    ok,
    tool_error,
    backend_error, ///< infrastructure failure; only produced for batch items
};

std::string_view to_string(SimStatus status);

struct SimResponse {
    std::string request_id;
    SimStatus status = SimStatus::ok;
    std::optional<ToolOutput> payload;
    std::string error_message;
    double latency = 0.0; ///< seconds
    bool cached = false;
};

Json to_json(const SimResponse& response);
SimResponse sim_response_from_json(const Json& body);

/// SHA-256 over the canonical tool spec, canonical arguments, a digest of the history and
/// the hint. Independent of map iteration order.
std::string cache_key(const ToolSpec& tool, const Json& arguments,
                      const std::vector<HistoryEntry>& history,
                      const std::optional<std::string>& hint);

struct GatewayOptions {
    std::size_t cache_capacity = 100'000;
    double temperature = 0.3;
    std::size_t history_window = 8;
    std::size_t batch_concurrency = 16;
};

inline constexpr const char* kSchemaFailureMessage = "simulation schema failure";

/// Unknown tool id.
class ToolNotFound : public Error {
public:
    using Error::Error;
};

/// Stands in for real tools: format-invalid calls get a deterministic error message with no
/// backend call; valid calls are simulated by the backend, checked against the response
/// schema (one repair re-ask), and cached.
class Gateway {
public:
    Gateway(std::shared_ptr<Backend> backend, std::shared_ptr<ToolRegistry> registry,
            GatewayOptions options = {},
            const PromptTemplates& prompts = PromptTemplates::defaults());

    /// Throws ToolNotFound for unknown ids, PreconditionError for malformed requests and
    /// BackendError when the backend is unreachable.
    SimResponse simulate(const SimRequest& request);

    /// Responses in request order. Per-item failures become tool_error / backend_error items.
    std::vector<SimResponse> simulate_batch(std::span<const SimRequest> requests);

    ToolRegistry& registry() noexcept { return *registry_; }
    ResponseCache& cache() noexcept { return cache_; }
    Backend& backend() noexcept { return *backend_; }

    /// Backend simulations performed (cache misses that reached the model).
    std::size_t simulations() const noexcept { return simulations_.load(); }

private:
    ToolSpec resolve(const SimRequest& request) const;
    ToolOutput run_simulation(const ToolSpec& tool, const SimRequest& request, bool& schema_ok);
    std::string next_request_id();

    std::shared_ptr<Backend> backend_;
    std::shared_ptr<ToolRegistry> registry_;
    GatewayOptions options_;
    PromptTemplates prompts_;
    ResponseCache cache_;

    std::mutex flights_mutex_;
    std::unordered_map<std::string, std::shared_future<std::optional<Json>>> flights_;

    std::atomic<std::size_t> simulations_{0};
    std::atomic<std::uint64_t> request_counter_{0};
    std::string request_prefix_;
};

struct ServerOptions {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::size_t threads = 16;
};

/// HTTP front end for a Gateway:
///   POST /v1/simulate, POST /v1/simulate_batch, GET /v1/tools, GET /v1/tools/{id},
///   POST /v1/tools, GET /healthz.
class GatewayServer {
public:
    GatewayServer(std::shared_ptr<Gateway> gateway, ServerOptions options);
    ~GatewayServer();

    GatewayServer(const GatewayServer&) = delete;
    GatewayServer& operator=(const GatewayServer&) = delete;

    /// Binds the socket; throws IoError on failure. Returns the bound port (useful with port 0).
    int bind();
    /// Serves until stop(); requires bind().
    void listen();
    /// Stops accepting and returns once in-flight requests have drained.
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace toolweaver
