#pragma once

#include <toolweaver/json_util.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace toolweaver::cli {

struct BackendSettings {
    std::string kind = "mock"; ///< mock | http
    std::string base_url = "http://127.0.0.1:8000/v1";
    std::string model_name = "gpt-4o-mini";
    std::string embedding_model = "text-embedding-3-small";
    double timeout = 60.0;
    std::size_t max_retries = 3;
    double backoff_base = 0.5;
    std::size_t rate_limit = 0;
    std::size_t max_concurrency = 8;
    std::size_t embed_batch = 64;
    std::string mock_script;
    double mock_delay_ms = 0.0;
};

struct EmbedderSettings {
    std::string kind = "hashing"; ///< hashing | backend
    std::size_t dim = 256;
};

/// Effective configuration of one run: documented defaults, overlaid by the config file,
/// overlaid by command-line flags.
struct RunConfig {
    BackendSettings backend;
    EmbedderSettings embedder;
    std::optional<std::uint64_t> seed;
    std::size_t workers = 8;
    std::string templates_dir;

    std::vector<std::string> taxonomy_seeds{"weather", "finance", "travel"};
    std::size_t target_fields = 12;
    std::size_t subfields_per_field = 3;
    std::size_t tools_per_subfield = 5;
    std::size_t max_attempts = 3;

    double dedup_threshold = 0.8;
    std::string dedup_key = "name";

    std::size_t quota = 5;
    std::string domain_notes;

    double theta = 0.30;
    std::size_t max_group_size = 3;
    std::size_t turns = 3;
    std::size_t multi_samples = 10;
    std::size_t max_epochs = 3;
    std::optional<double> min_coherence;

    std::size_t errors_per_tool = 4;
    bool backend_error_messages = true;

    std::string host = "127.0.0.1";
    int port = 8080;
    std::size_t server_threads = 16;
    std::size_t cache_capacity = 100'000;
    std::string cache_file;
    std::size_t history_window = 8;
    double sim_temperature = 0.3;

    std::size_t bench_requests = 100;
    std::size_t bench_concurrency = 4;
    double remote_latency = 0.92;
    std::size_t remote_rate_limit = 40;

    double overlap_threshold = 0.8;
    bool fail_fast = true;
};

/// Nested JSON form; also the "config" section of run manifests.
Json to_json(const RunConfig& config);

/// Parses a full or partial config object over the defaults. Unknown keys and out-of-range
/// values throw ValidationError. A run manifest is accepted too (its "config" section).
RunConfig config_from_json(const Json& value);

/// Defaults ⊕ file ⊕ overrides, where `overrides` uses the same nested layout.
RunConfig layered_config(const std::optional<std::filesystem::path>& file, const Json& overrides);

/// Range checks; throws ValidationError naming the key.
void validate(const RunConfig& config);

} // namespace toolweaver::cli
