#include "toolweaver/cli/config.hpp"

#include <toolweaver/dataset_io.hpp>
#include <toolweaver/errors.hpp>

#include <algorithm>

#include <set>

namespace toolweaver::cli {

Json to_json(const RunConfig& c) {
    const auto& b = c.backend;
    return {
        {"backend",
         {{"kind", b.kind},
          {"base_url", b.base_url},
          {"model_name", b.model_name},
          {"embedding_model", b.embedding_model},
          {"timeout", b.timeout},
          {"max_retries", b.max_retries},
          {"backoff_base", b.backoff_base},
          {"rate_limit", b.rate_limit},
          {"max_concurrency", b.max_concurrency},
          {"embed_batch", b.embed_batch},
          {"mock_script", b.mock_script},
          {"mock_delay_ms", b.mock_delay_ms}}},
        {"embedder", {{"kind", c.embedder.kind}, {"dim", c.embedder.dim}}},
        {"seed", c.seed ? Json(*c.seed) : Json(nullptr)},
        {"workers", c.workers},
        {"templates_dir", c.templates_dir},
        {"max_attempts", c.max_attempts},
        {"taxonomy",
         {{"seeds", c.taxonomy_seeds},
          {"target_fields", c.target_fields},
          {"subfields_per_field", c.subfields_per_field}}},
        {"tools", {{"per_subfield", c.tools_per_subfield}}},
        {"dedup", {{"threshold", c.dedup_threshold}, {"key", c.dedup_key}}},
        {"single", {{"quota", c.quota}, {"domain_notes", c.domain_notes}}},
        {"multi",
         {{"theta", c.theta},
          {"max_group_size", c.max_group_size},
          {"turns", c.turns},
          {"samples", c.multi_samples},
          {"max_epochs", c.max_epochs},
          {"min_coherence", c.min_coherence ? Json(*c.min_coherence) : Json(nullptr)}}},
        {"error", {{"per_tool", c.errors_per_tool}, {"backend_messages", c.backend_error_messages}}},
        {"server",
         {{"host", c.host},
          {"port", c.port},
          {"threads", c.server_threads},
          {"cache_capacity", c.cache_capacity},
          {"cache_file", c.cache_file},
          {"history_window", c.history_window},
          {"temperature", c.sim_temperature}}},
        {"bench",
         {{"requests", c.bench_requests},
          {"concurrency", c.bench_concurrency},
          {"remote_latency", c.remote_latency},
          {"remote_rate_limit", c.remote_rate_limit}}},
        {"overlap", {{"threshold", c.overlap_threshold}}},
        {"eval", {{"fail_fast", c.fail_fast}}},
    };
}

namespace {

void check_keys(const Json& value, const Json& schema, const std::string& where) {
    if (!value.is_object()) throw ValidationError("config '" + where + "' must be an object");
    for (const auto& [key, v] : value.items()) {
        const std::string path = where.empty() ? key : where + "." + key;
        const auto it = schema.find(key);
        if (it == schema.end()) throw ValidationError("unknown config key '" + path + "'");
        if (it->is_object()) check_keys(v, *it, path);
    }
}

class Reader {
public:
    explicit Reader(const Json& root) : root_(root) {}

    const Json& at(const std::string& path) const {
        const Json* cur = &root_;
        std::size_t pos = 0;
        while (true) {
            const auto dot = path.find('.', pos);
            cur = &cur->at(path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos));
            if (dot == std::string::npos) return *cur;
            pos = dot + 1;
        }
    }
    bool has(const std::string& path) const {
        try {
            return !at(path).is_null();
        } catch (const Json::exception&) {
            return false;
        }
    }

    std::string str(const std::string& path) const {
        const Json& v = at(path);
        if (!v.is_string()) fail(path, "a string");
        return v.get<std::string>();
    }
    double real(const std::string& path) const {
        const Json& v = at(path);
        if (!v.is_number()) fail(path, "a number");
        return v.get<double>();
    }
    std::uint64_t count(const std::string& path) const {
        const Json& v = at(path);
        if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
            fail(path, "a non-negative integer");
        }
        return v.get<std::uint64_t>();
    }
    bool flag(const std::string& path) const {
        const Json& v = at(path);
        if (!v.is_boolean()) fail(path, "a boolean");
        return v.get<bool>();
    }
    std::vector<std::string> strings(const std::string& path) const {
        const Json& v = at(path);
        if (!v.is_array() || !std::all_of(v.begin(), v.end(), [](const Json& e) { return e.is_string(); })) {
            fail(path, "a list of strings");
        }
        return v.get<std::vector<std::string>>();
    }

private:
    [[noreturn]] static void fail(const std::string& path, const char* what) {
        throw ValidationError("config key '" + path + "' must be " + what);
    }
    const Json& root_;
};

} // namespace

RunConfig config_from_json(const Json& input) {
    const Json& value = input.is_object() && input.contains("config") && input.contains("command") ? input["config"] : input;
    const RunConfig defaults;
    Json merged = to_json(defaults);
    check_keys(value, merged, "");
    merged.merge_patch(value);

    const Reader r(merged);
    RunConfig c;
    auto& b = c.backend;
    b.kind = r.str("backend.kind");
    b.base_url = r.str("backend.base_url");
    b.model_name = r.str("backend.model_name");
    b.embedding_model = r.str("backend.embedding_model");
    b.timeout = r.real("backend.timeout");
    b.max_retries = r.count("backend.max_retries");
    b.backoff_base = r.real("backend.backoff_base");
    b.rate_limit = r.count("backend.rate_limit");
    b.max_concurrency = r.count("backend.max_concurrency");
    b.embed_batch = r.count("backend.embed_batch");
    b.mock_script = r.str("backend.mock_script");
    b.mock_delay_ms = r.real("backend.mock_delay_ms");
    c.embedder.kind = r.str("embedder.kind");
    c.embedder.dim = r.count("embedder.dim");
    if (r.has("seed")) c.seed = r.count("seed");
    c.workers = r.count("workers");
    c.templates_dir = r.str("templates_dir");
    c.max_attempts = r.count("max_attempts");
    c.taxonomy_seeds = r.strings("taxonomy.seeds");
    c.target_fields = r.count("taxonomy.target_fields");
    c.subfields_per_field = r.count("taxonomy.subfields_per_field");
    c.tools_per_subfield = r.count("tools.per_subfield");
    c.dedup_threshold = r.real("dedup.threshold");
    c.dedup_key = r.str("dedup.key");
    c.quota = r.count("single.quota");
    c.domain_notes = r.str("single.domain_notes");
    c.theta = r.real("multi.theta");
    c.max_group_size = r.count("multi.max_group_size");
    c.turns = r.count("multi.turns");
    c.multi_samples = r.count("multi.samples");
    c.max_epochs = r.count("multi.max_epochs");
    if (r.has("multi.min_coherence")) c.min_coherence = r.real("multi.min_coherence");
    c.errors_per_tool = r.count("error.per_tool");
    c.backend_error_messages = r.flag("error.backend_messages");
    c.host = r.str("server.host");
    if (!merged["server"]["port"].is_number_integer()) throw ValidationError("config key 'server.port' must be an integer");
    c.port = merged["server"]["port"].get<int>();
    c.server_threads = r.count("server.threads");
    c.cache_capacity = r.count("server.cache_capacity");
    c.cache_file = r.str("server.cache_file");
    c.history_window = r.count("server.history_window");
    c.sim_temperature = r.real("server.temperature");
    c.bench_requests = r.count("bench.requests");
    c.bench_concurrency = r.count("bench.concurrency");
    c.remote_latency = r.real("bench.remote_latency");
    c.remote_rate_limit = r.count("bench.remote_rate_limit");
    c.overlap_threshold = r.real("overlap.threshold");
    c.fail_fast = r.flag("eval.fail_fast");
    validate(c);
    return c;
}

RunConfig layered_config(const std::optional<std::filesystem::path>& file, const Json& overrides) {
    Json layered = Json::object();
    if (file) {
        std::string text;
        try {
            text = read_file(*file);
        } catch (const IoError& e) {
            throw ValidationError(std::string("missing config: ") + e.what());
        }
        Json from_file;
        try {
            from_file = parse_strict(text);
        } catch (const ParseError& e) {
            throw ValidationError("config file " + file->string() + ": " + e.what());
        }
        if (from_file.is_object() && from_file.contains("config") && from_file.contains("command")) {
            from_file = from_file["config"];
        }
        layered = std::move(from_file);
    }
    // Validate the file layer on its own so errors name the right source.
    config_from_json(layered);
    layered.merge_patch(overrides);
    return config_from_json(layered);
}

void validate(const RunConfig& c) {
    auto require = [](bool ok, const std::string& message) {
        if (!ok) throw ValidationError(message);
    };
    require(c.backend.kind == "mock" || c.backend.kind == "http", "backend.kind must be 'mock' or 'http'");
    require(c.backend.timeout > 0.0, "backend.timeout must be positive");
    require(c.backend.backoff_base >= 0.0, "backend.backoff_base must be non-negative");
    require(c.backend.max_concurrency >= 1, "backend.max_concurrency must be at least 1");
    require(c.backend.embed_batch >= 1, "backend.embed_batch must be at least 1");
    require(c.backend.mock_delay_ms >= 0.0, "backend.mock_delay_ms must be non-negative");
    require(c.embedder.kind == "hashing" || c.embedder.kind == "backend", "embedder.kind must be 'hashing' or 'backend'");
    require(c.embedder.dim >= 16, "embedder.dim must be at least 16");
    require(c.workers >= 1, "workers must be at least 1");
    require(c.max_attempts >= 1, "max_attempts must be at least 1");
    require(c.target_fields >= 1, "taxonomy.target_fields must be at least 1");
    require(c.dedup_threshold >= 0.0 && c.dedup_threshold <= 1.0, "dedup threshold must be within [0, 1]");
    require(c.dedup_key == "name" || c.dedup_key == "description", "dedup.key must be 'name' or 'description'");
    require(c.quota >= 1, "single.quota must be at least 1");
    require(c.theta > -1.0 && c.theta < 1.0, "multi.theta must lie in (-1, 1)");
    require(c.max_group_size >= 1, "multi.max_group_size must be at least 1");
    require(c.turns >= 1 && c.turns <= 8, "multi.turns must lie in [1, 8]");
    require(!c.min_coherence || (*c.min_coherence >= -1.0 && *c.min_coherence <= 1.0),
            "multi.min_coherence must lie in [-1, 1]");
    require(c.port >= 0 && c.port <= 65535, "server.port must lie in [0, 65535]");
    require(c.server_threads >= 1, "server.threads must be at least 1");
    require(c.cache_capacity >= 1, "server.cache_capacity must be at least 1");
    require(c.sim_temperature >= 0.0 && c.sim_temperature <= 2.0, "server.temperature must lie in [0, 2]");
    require(c.bench_requests >= 1, "bench.requests must be at least 1");
    require(c.bench_concurrency >= 1, "bench.concurrency must be at least 1");
    require(c.remote_latency >= 0.0, "bench.remote_latency must be non-negative");
    require(c.overlap_threshold >= -1.0 && c.overlap_threshold <= 1.0, "overlap threshold must lie in [-1, 1]");
}

} // namespace toolweaver::cli
