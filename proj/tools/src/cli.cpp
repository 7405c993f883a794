#include "toolweaver/cli/cli.hpp"

#include "toolweaver/cli/config.hpp"

#include <toolweaver/carg_error.hpp>
#include <toolweaver/carg_multi.hpp>
#include <toolweaver/carg_single.hpp>
#include <toolweaver/dataset_io.hpp>
#include <toolweaver/errors.hpp>
#include <toolweaver/eval.hpp>
#include <toolweaver/gateway.hpp>
#include <toolweaver/latency.hpp>
#include <toolweaver/mock_backend.hpp>
#include <toolweaver/parallel.hpp>
#include <toolweaver/synthetic_world.hpp>
#include <toolweaver/tool_registry.hpp>

#include <CLI11.hpp>

#include <csignal>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

namespace toolweaver::cli {

namespace {

namespace fs = std::filesystem;

// Flag values; every set option becomes one key of the override layer.
struct Flags {
    std::optional<std::string> config;
    Json overrides = Json::object();
    std::map<std::string, std::string> paths;
    std::vector<std::string> inputs;
    std::string format = "table";
};

template <typename T>
void add_override(CLI::App& app, Flags& flags, const std::string& name, const std::string& key,
                  const std::string& help) {
    app.add_option_function<T>(
        name,
        [&flags, key](const T& value) {
            Json* cur = &flags.overrides;
            std::size_t pos = 0;
            for (auto dot = key.find('.'); dot != std::string::npos; dot = key.find('.', pos)) {
                cur = &(*cur)[key.substr(pos, dot - pos)];
                pos = dot + 1;
            }
            (*cur)[key.substr(pos)] = value;
        },
        help);
}

void add_path(CLI::App& app, Flags& flags, const std::string& name, const std::string& key, const std::string& help,
              bool required = false) {
    auto* opt = app.add_option_function<std::string>(
        name, [&flags, key](const std::string& v) { flags.paths[key] = v; }, help);
    if (required) opt->required();
}

void add_backend_flags(CLI::App& app, Flags& flags) {
    add_override<std::string>(app, flags, "--backend", "backend.kind", "mock or http");
    add_override<std::string>(app, flags, "--base-url", "backend.base_url", "chat-completion endpoint base URL");
    add_override<std::string>(app, flags, "--model", "backend.model_name", "generation model name");
    add_override<std::string>(app, flags, "--mock-script", "backend.mock_script", "mock script (JSONL rules)");
    add_override<std::size_t>(app, flags, "--rate-limit", "backend.rate_limit", "requests per minute, 0 = off");
    add_override<std::size_t>(app, flags, "--max-concurrency", "backend.max_concurrency", "in-flight backend calls");
    add_override<std::string>(app, flags, "--templates", "templates_dir", "directory overriding prompt templates");
    add_override<std::size_t>(app, flags, "--workers", "workers", "worker threads");
}

void add_seed_flag(CLI::App& app, Flags& flags) {
    add_override<std::uint64_t>(app, flags, "--seed", "seed", "random seed (mandatory for pipeline commands)");
}

class Run {
public:
    Run(std::string command, RunConfig config, std::ostream& out, std::ostream& err)
        : command_(std::move(command)), config_(std::move(config)), out_(out), err_(err) {}

    const RunConfig& config() const { return config_; }
    std::ostream& out() { return out_; }
    std::ostream& err() { return err_; }

    std::uint64_t seed() const {
        if (!config_.seed) throw ValidationError(command_ + " requires --seed (or 'seed' in the config file)");
        return *config_.seed;
    }

    Backend& backend() {
        if (!backend_) backend_ = make_backend();
        return *backend_;
    }
    std::shared_ptr<Backend> shared_backend() {
        backend();
        return backend_;
    }

    Embedder& embedder() {
        if (config_.embedder.kind == "backend") return backend();
        if (!hashing_) hashing_ = std::make_unique<HashingEmbedder>(config_.embedder.dim);
        return *hashing_;
    }

    const PromptTemplates& prompts() {
        if (!prompts_) {
            prompts_ = config_.templates_dir.empty() ? PromptTemplates::defaults()
                                                     : PromptTemplates::load_dir(config_.templates_dir);
        }
        return *prompts_;
    }

    std::string read_input(const std::string& role, const fs::path& path) {
        std::string text = read_file(path);
        inputs_[role] = {{"file", path.filename().string()}, {"sha256", sha256_hex(text)}};
        return text;
    }

    std::vector<ToolSpec> read_tools(const fs::path& path) { return parse_tool_corpus(read_input("tools", path)); }

    void write_output(const fs::path& path, std::string_view contents) {
        write_file(path, contents);
        outputs_.push_back(path);
    }

    Json& counts() { return counts_; }

    /// Manifest next to the first output: full effective config, seed, inputs, counts.
    void write_manifest() {
        if (outputs_.empty()) return;
        Json outputs = Json::array();
        for (const auto& p : outputs_) outputs.push_back(p.filename().string());
        const Json manifest = {{"command", command_},
                               {"config", to_json(config_)},
                               {"seed", config_.seed ? Json(*config_.seed) : Json(nullptr)},
                               {"inputs", inputs_},
                               {"outputs", std::move(outputs)},
                               {"counts", counts_},
                               {"version", "0.3.0"}};
        fs::path path = outputs_.front();
        path += ".manifest.json";
        write_file(path, manifest.dump(2) + "\n");
    }

private:
    std::shared_ptr<Backend> make_backend() {
        const auto& s = config_.backend;
        if (s.kind == "http") {
            BackendConfig bc;
            bc.base_url = s.base_url;
            bc.model_name = s.model_name;
            bc.embedding_model = s.embedding_model;
            bc.credential = credential_from_env();
            bc.timeout = s.timeout;
            bc.max_retries = s.max_retries;
            bc.backoff_base = s.backoff_base;
            bc.rate_limit = s.rate_limit;
            bc.max_concurrency = s.max_concurrency;
            bc.embed_batch = s.embed_batch;
            return std::make_shared<HttpBackend>(bc);
        }
        BackendConfig bc = MockBackend::default_config();
        bc.rate_limit = s.rate_limit;
        std::vector<MockRule> rules;
        if (!s.mock_script.empty()) {
            std::string text;
            try {
                text = read_file(s.mock_script);
            } catch (const IoError& e) {
                throw ValidationError(std::string("mock script: ") + e.what());
            }
            rules = parse_mock_script(text);
            inputs_["mock_script"] = {{"file", fs::path(s.mock_script).filename().string()}, {"sha256", sha256_hex(text)}};
        }
        auto mock = std::make_shared<MockBackend>(std::move(rules), bc);
        mock->set_fallback(synthetic_world_responder());
        mock->set_embedding_dim(config_.embedder.dim);
        if (s.mock_delay_ms > 0) mock->set_delay(from_seconds(s.mock_delay_ms / 1000.0));
        return mock;
    }

    std::string command_;
    RunConfig config_;
    std::ostream& out_;
    std::ostream& err_;
    std::shared_ptr<Backend> backend_;
    std::unique_ptr<HashingEmbedder> hashing_;
    std::optional<PromptTemplates> prompts_;
    Json inputs_ = Json::object();
    std::vector<fs::path> outputs_;
    Json counts_ = Json::object();
};

const std::string& need(const Flags& flags, const std::string& key) {
    const auto it = flags.paths.find(key);
    if (it == flags.paths.end()) throw ValidationError("--" + key + " is required");
    return it->second;
}

std::optional<std::string> maybe(const Flags& flags, const std::string& key) {
    const auto it = flags.paths.find(key);
    if (it == flags.paths.end()) return std::nullopt;
    return it->second;
}

std::vector<Sample> read_samples(Run& run, const std::vector<std::string>& paths) {
    std::vector<Sample> out;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        auto part = parse_samples(run.read_input("samples_" + std::to_string(i + 1), paths[i]));
        out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    return out;
}

// ------------------------------------------------------------------------------------------

void cmd_taxonomy(Run& run, const Flags& flags) {
    const auto& c = run.config();
    TaxonomyOptions opts;
    opts.target_fields = c.target_fields;
    opts.subfields_per_field = c.subfields_per_field;
    opts.max_attempts = c.max_attempts;
    opts.rng_seed = run.seed();
    const Taxonomy taxonomy = expand_taxonomy(c.taxonomy_seeds, run.backend(), opts, run.prompts());
    std::size_t subfields = 0;
    for (const auto& f : taxonomy.fields) subfields += f.subfields.size();
    run.counts() = {{"fields", taxonomy.size()}, {"subfields", subfields}};
    run.write_output(need(flags, "out"), to_json(taxonomy).dump(2) + "\n");
}

void cmd_gen_tools(Run& run, const Flags& flags) {
    const auto& c = run.config();
    const std::uint64_t seed = run.seed();
    std::vector<ToolSpec> tools;
    if (const auto foreign = maybe(flags, "import")) {
        MappingProfile profile = MappingProfile::native();
        if (const auto p = maybe(flags, "profile")) profile = MappingProfile::parse(run.read_input("profile", *p));
        const auto imported = import_foreign_text(run.read_input("import", *foreign), profile);
        for (const auto& issue : imported.issues) {
            run.err() << "warning: record " << issue.record << ": " << issue.message << "\n";
        }
        tools = import_external(imported.records, &run.backend(), c.max_attempts, run.prompts());
        run.counts() = {{"imported", tools.size()}, {"skipped", imported.issues.size()}};
    } else {
        const Taxonomy taxonomy =
            taxonomy_from_json(parse_strict(run.read_input("taxonomy", need(flags, "taxonomy"))));
        struct Job {
            std::string field, subfield;
        };
        std::vector<Job> jobs;
        for (const auto& f : taxonomy.fields) {
            for (const auto& s : f.subfields) jobs.push_back({f.name, s});
        }
        const auto results = parallel_map(jobs.size(), c.workers, [&](std::size_t i) {
            ToolGenerationOptions opts;
            opts.count = c.tools_per_subfield;
            opts.max_attempts = c.max_attempts;
            opts.rng_seed = Rng(seed).fork(jobs[i].field + "/" + jobs[i].subfield).seed();
            ToolGenerationReport report;
            return generate_tools(jobs[i].field, jobs[i].subfield, run.backend(), opts, &report, run.prompts());
        });
        for (const auto& r : results) tools.insert(tools.end(), r.begin(), r.end());
        run.counts() = {{"subfields", jobs.size()}, {"tools", tools.size()}};
    }
    run.write_output(need(flags, "out"), serialize_tool_corpus(tools));
}

void cmd_dedup(Run& run, const Flags& flags) {
    const auto& c = run.config();
    const auto tools = run.read_tools(need(flags, "in"));
    const auto result = deduplicate(tools, run.embedder(), c.dedup_threshold, *parse_dedup_key(c.dedup_key));
    Json removed = Json::array();
    for (const auto& r : result.removed) {
        removed.push_back({{"kept_id", r.kept_id}, {"removed_id", r.removed_id}, {"similarity", r.similarity}});
    }
    run.counts() = {{"input", tools.size()}, {"kept", result.kept.size()}, {"removed", std::move(removed)}};
    run.write_output(need(flags, "out"), serialize_tool_corpus(result.kept));
}

void cmd_carg_single(Run& run, const Flags& flags) {
    const auto& c = run.config();
    SingleTurnOptions opts;
    opts.quota = c.quota;
    opts.max_attempts = c.max_attempts;
    opts.rng_seed = run.seed();
    opts.domain_notes = c.domain_notes;
    const auto tools = run.read_tools(need(flags, "tools"));
    const auto corpus = run_single_turn_corpus(tools, run.backend(), opts, c.workers, run.prompts());
    std::vector<Sample> samples(corpus.samples.begin(), corpus.samples.end());
    Json low_yield = Json::array();
    Json backend_errors = Json::array();
    for (const auto& r : corpus.reports) {
        if (r.low_yield) low_yield.push_back(r.tool_id);
        if (!r.backend_error.empty()) backend_errors.push_back({{"tool_id", r.tool_id}, {"error", r.backend_error}});
    }
    run.counts() = {{"tools", tools.size()},
                    {"accepted", samples.size()},
                    {"low_yield", std::move(low_yield)},
                    {"backend_errors", std::move(backend_errors)}};
    run.write_output(need(flags, "out"), serialize_samples(samples));
}

void cmd_carg_multi(Run& run, const Flags& flags) {
    const auto& c = run.config();
    MultiTurnOptions opts;
    opts.theta = c.theta;
    opts.max_group_size = c.max_group_size;
    opts.turns = c.turns;
    opts.samples = c.multi_samples;
    opts.max_epochs = c.max_epochs;
    opts.min_coherence = c.min_coherence;
    opts.rng_seed = run.seed();
    const auto tools = run.read_tools(need(flags, "tools"));
    const auto corpus = run_multi_turn(tools, run.embedder(), run.backend(), opts, c.workers, run.prompts());
    std::vector<Sample> samples(corpus.samples.begin(), corpus.samples.end());
    const auto& r = corpus.report;
    run.counts() = {{"groups", r.groups},
                    {"accepted", r.accepted},
                    {"rejected_coherence", r.rejected_coherence},
                    {"generation_errors", r.generation_errors},
                    {"validation_failures", r.validation_failures},
                    {"unevaluated", r.unevaluated}};
    run.write_output(need(flags, "out"), serialize_samples(samples));
}

void cmd_carg_error(Run& run, const Flags& flags) {
    const auto& c = run.config();
    ErrorGenerationOptions opts;
    opts.per_tool = c.errors_per_tool;
    opts.rng_seed = run.seed();
    opts.messages.use_backend = c.backend_error_messages;
    const auto tools = run.read_tools(need(flags, "tools"));
    std::vector<SingleTurnSample> singles;
    for (auto& s : parse_samples(run.read_input("single", need(flags, "single")))) {
        if (auto* single = std::get_if<SingleTurnSample>(&s)) singles.push_back(std::move(*single));
    }
    const auto corpus = run_error_generation(tools, singles, run.backend(), opts, c.workers, run.prompts());
    std::vector<Sample> samples(corpus.samples.begin(), corpus.samples.end());
    const auto& r = corpus.report;
    run.counts() = {{"attempted", r.attempted},
                    {"accepted", r.accepted},
                    {"inapplicable", r.inapplicable},
                    {"generator_errors", r.generator_errors},
                    {"validation_failures", r.validation_failures},
                    {"unevaluated", r.unevaluated}};
    run.write_output(need(flags, "out"), serialize_samples(samples));
}

void cmd_export(Run& run, const Flags& flags) {
    if (flags.inputs.empty()) throw ValidationError("--in is required");
    const ToolRegistry registry(run.read_tools(need(flags, "tools")));
    const auto samples = read_samples(run, flags.inputs);
    const std::string text = render_sft(samples, registry);
    run.counts() = {{"records", samples.size()}};
    run.write_output(need(flags, "out"), text);
}

std::atomic<bool> g_stop_requested{false};

void cmd_serve(Run& run, const Flags& flags) {
    const auto& c = run.config();
    auto registry = std::make_shared<ToolRegistry>();
    if (const auto path = maybe(flags, "tools")) {
        for (auto& t : run.read_tools(*path)) registry->add(std::move(t));
    }
    GatewayOptions gopts;
    gopts.cache_capacity = c.cache_capacity;
    gopts.temperature = c.sim_temperature;
    gopts.history_window = c.history_window;
    auto gateway = std::make_shared<Gateway>(run.shared_backend(), registry, gopts, run.prompts());
    if (!c.cache_file.empty() && fs::exists(c.cache_file)) gateway->cache().load(c.cache_file);
    if (auto* http = dynamic_cast<HttpBackend*>(&run.backend()); http && !http->health_check()) {
        run.err() << "warning: backend health check failed for " << c.backend.base_url << "\n";
    }

    GatewayServer server(gateway, {c.host, c.port, c.server_threads});
    const int port = server.bind();
    run.out() << "listening on " << c.host << ":" << port << " (" << registry->size() << " tools)\n" << std::flush;

    g_stop_requested = false;
    auto on_signal = [](int) { g_stop_requested = true; };
    const auto old_int = std::signal(SIGINT, on_signal);
    const auto old_term = std::signal(SIGTERM, on_signal);
    std::jthread watcher([&server](std::stop_token st) {
        while (!st.stop_requested() && !g_stop_requested) std::this_thread::sleep_for(std::chrono::milliseconds(100));
        server.stop();
    });
    server.listen();
    watcher.request_stop();
    watcher.join();
    std::signal(SIGINT, old_int);
    std::signal(SIGTERM, old_term);
    if (!c.cache_file.empty()) gateway->cache().save(c.cache_file);
    run.out() << "stopped\n";
}

void cmd_eval(Run& run, const Flags& flags) {
    const auto& c = run.config();
    if (flags.inputs.empty()) throw ValidationError("--in is required");
    const ToolRegistry registry(run.read_tools(need(flags, "tools")));
    std::vector<Json> records;
    for (std::size_t i = 0; i < flags.inputs.size(); ++i) {
        const std::string text = run.read_input("samples_" + std::to_string(i + 1), flags.inputs[i]);
        std::istringstream in(text);
        std::size_t line_no = 0;
        for (std::string line; std::getline(in, line);) {
            ++line_no;
            if (trim(line).empty()) continue;
            try {
                records.push_back(Json::parse(line));
            } catch (const Json::exception& e) {
                throw ParseError(flags.inputs[i] + ": " + e.what(), line_no);
            }
        }
    }
    ScoreOptions sopts;
    sopts.fail_fast = c.fail_fast;
    const auto scores = parallel_map(records.size(), c.workers, [&](std::size_t i) {
        const Json& r = records[i];
        const auto scenario = parse_scenario(r.value("scenario", std::string()));
        if (!scenario) throw ParseError("record " + std::to_string(i + 1) + " has no known scenario");
        const auto tool = registry.find(r.value("tool_id", std::string()));
        if (!tool) throw PreconditionError("record " + std::to_string(i + 1) + ": unknown tool");
        return score_record(*scenario, r, *tool, run.backend(), sopts, run.prompts());
    });
    const auto report = aggregate(scores);
    const auto format = flags.format == "csv" ? ReportFormat::csv : ReportFormat::table;
    const std::string text = render_report(report, format);
    Json per = Json::object();
    for (const auto& [s, m] : report.scenarios) {
        per[std::string(to_string(s))] = {{"evaluated", m.evaluated}, {"unevaluated", m.unevaluated}};
    }
    run.counts() = {{"records", records.size()}, {"scenarios", std::move(per)}};
    if (const auto out = maybe(flags, "out")) {
        run.write_output(*out, text);
    } else {
        run.out() << text;
    }
}

void cmd_bench(Run& run, const Flags& flags) {
    const auto& c = run.config();
    const auto tools = run.read_tools(need(flags, "tools"));
    if (tools.empty()) throw ValidationError("bench needs at least one tool");
    std::vector<SimRequest> workload;
    for (std::size_t i = 0; i < c.bench_requests; ++i) {
        SimRequest r;
        r.tool_id = tools[i % tools.size()].id();
        r.arguments = placeholder_arguments(tools[i % tools.size()]);
        workload.push_back(std::move(r));
    }
    std::unique_ptr<LatencyTarget> target;
    if (const auto url = maybe(flags, "url")) {
        target = std::make_unique<HttpGatewayTarget>(*url);
    } else {
        auto registry = std::make_shared<ToolRegistry>(tools);
        GatewayOptions gopts;
        gopts.cache_capacity = c.cache_capacity;
        gopts.temperature = c.sim_temperature;
        target = std::make_unique<GatewayTarget>(std::make_shared<Gateway>(run.shared_backend(), registry, gopts, run.prompts()));
    }
    std::optional<RemoteProfile> remote;
    if (c.remote_latency > 0.0) remote = RemoteProfile{c.remote_latency, c.remote_rate_limit};
    const auto stats = latency_bench(*target, workload, c.bench_concurrency, remote);
    std::ostringstream csv;
    write_latency_csv(stats, csv);
    run.counts() = {{"requests", workload.size()}};
    if (const auto out = maybe(flags, "out")) {
        run.write_output(*out, csv.str());
    } else {
        run.out() << csv.str();
    }
}

void cmd_overlap(Run& run, const Flags& flags) {
    const auto& c = run.config();
    const auto a = parse_tool_corpus(run.read_input("corpus_a", need(flags, "a")));
    const auto b = parse_tool_corpus(run.read_input("corpus_b", need(flags, "b")));
    const auto report = corpus_overlap(a, b, run.embedder(), c.overlap_threshold);
    const Json summary = {{"a_tools", a.size()},
                          {"b_tools", b.size()},
                          {"fraction_a_matched", report.fraction_a_matched},
                          {"fraction_b_matched", report.fraction_b_matched},
                          {"matched_pairs", report.pairs.size()}};
    run.counts() = summary;
    if (const auto out = maybe(flags, "out")) {
        std::ostringstream csv;
        write_overlap_csv(report, csv);
        run.write_output(*out, csv.str());
    }
    run.out() << summary.dump(2) << "\n";
}

void cmd_stats(Run& run, const Flags& flags) {
    const auto stats = corpus_stats_text(run.read_input("in", need(flags, "in")));
    run.out() << to_json(stats).dump(2) << "\n";
}

using Handler = void (*)(Run&, const Flags&);

struct Command {
    CLI::App* app;
    Handler handler;
};

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Synthetic tool-use data generation and tool simulation", "toolweaver"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "0.3.0");

    Flags flags;
    std::vector<Command> commands;
    auto sub = [&](const char* name, const char* help, Handler handler) {
        CLI::App* s = app.add_subcommand(name, help);
        s->add_option_function<std::string>(
            "--config", [&flags](const std::string& v) { flags.config = v; }, "JSON config file or run manifest");
        commands.push_back({s, handler});
        return s;
    };

    auto* taxonomy = sub("taxonomy", "expand seed fields into a field/subfield taxonomy", cmd_taxonomy);
    add_backend_flags(*taxonomy, flags);
    add_seed_flag(*taxonomy, flags);
    add_override<std::vector<std::string>>(*taxonomy, flags, "--fields", "taxonomy.seeds", "seed fields");
    add_override<std::size_t>(*taxonomy, flags, "--target-fields", "taxonomy.target_fields", "fields to reach");
    add_override<std::size_t>(*taxonomy, flags, "--subfields", "taxonomy.subfields_per_field", "subfields per field");
    add_path(*taxonomy, flags, "--out", "out", "taxonomy output file");

    auto* gen = sub("gen-tools", "generate tools for every subfield, or import a foreign corpus", cmd_gen_tools);
    add_backend_flags(*gen, flags);
    add_seed_flag(*gen, flags);
    add_override<std::size_t>(*gen, flags, "--count", "tools.per_subfield", "tools per subfield");
    add_override<std::size_t>(*gen, flags, "--max-attempts", "max_attempts", "generation attempts");
    add_path(*gen, flags, "--taxonomy", "taxonomy", "taxonomy file");
    add_path(*gen, flags, "--import", "import", "foreign tool corpus to import");
    add_path(*gen, flags, "--profile", "profile", "mapping profile for --import");
    add_path(*gen, flags, "--out", "out", "tool corpus output (JSONL)");

    auto* dedup = sub("dedup", "remove near-duplicate tools", cmd_dedup);
    add_override<double>(*dedup, flags, "--threshold", "dedup.threshold", "cosine threshold in [0, 1]");
    add_override<std::string>(*dedup, flags, "--key", "dedup.key", "name or description");
    add_override<std::string>(*dedup, flags, "--embedder", "embedder.kind", "hashing or backend");
    add_backend_flags(*dedup, flags);
    add_path(*dedup, flags, "--in", "in", "tool corpus");
    add_path(*dedup, flags, "--out", "out", "deduplicated corpus");

    auto* single = sub("carg-single", "single-turn input/output samples", cmd_carg_single);
    add_backend_flags(*single, flags);
    add_seed_flag(*single, flags);
    add_override<std::size_t>(*single, flags, "--quota", "single.quota", "accepted samples per tool");
    add_override<std::size_t>(*single, flags, "--max-attempts", "max_attempts", "attempts per tool");
    add_path(*single, flags, "--tools", "tools", "tool corpus");
    add_path(*single, flags, "--out", "out", "sample output (JSONL)");

    auto* multi = sub("carg-multi", "multi-turn dialogue samples", cmd_carg_multi);
    add_backend_flags(*multi, flags);
    add_seed_flag(*multi, flags);
    add_override<double>(*multi, flags, "--theta", "multi.theta", "association threshold");
    add_override<std::size_t>(*multi, flags, "--turns", "multi.turns", "dialogue length L");
    add_override<std::size_t>(*multi, flags, "--samples", "multi.samples", "samples to collect");
    add_override<std::size_t>(*multi, flags, "--group-size", "multi.max_group_size", "maximum tools per group");
    add_override<double>(*multi, flags, "--min-coherence", "multi.min_coherence", "reject groups below this");
    add_override<std::string>(*multi, flags, "--embedder", "embedder.kind", "hashing or backend");
    add_path(*multi, flags, "--tools", "tools", "tool corpus");
    add_path(*multi, flags, "--out", "out", "sample output (JSONL)");

    auto* error = sub("carg-error", "error-handling samples from single-turn inputs", cmd_carg_error);
    add_backend_flags(*error, flags);
    add_seed_flag(*error, flags);
    add_override<std::size_t>(*error, flags, "--per-tool", "error.per_tool", "corruptions per tool");
    add_path(*error, flags, "--tools", "tools", "tool corpus");
    add_path(*error, flags, "--single", "single", "accepted single-turn samples");
    add_path(*error, flags, "--out", "out", "sample output (JSONL)");

    auto* exp = sub("export", "export samples as chat fine-tuning records", cmd_export);
    exp->add_option("--in", flags.inputs, "sample files")->expected(1, -1);
    add_path(*exp, flags, "--tools", "tools", "tool corpus");
    add_path(*exp, flags, "--out", "out", "SFT output (JSONL)");

    auto* serve = sub("serve", "run the simulation gateway over HTTP", cmd_serve);
    add_backend_flags(*serve, flags);
    add_override<std::string>(*serve, flags, "--host", "server.host", "bind address");
    add_override<int>(*serve, flags, "--port", "server.port", "bind port (0 = any)");
    add_override<std::size_t>(*serve, flags, "--threads", "server.threads", "request threads");
    add_override<std::string>(*serve, flags, "--cache-file", "server.cache_file", "persist the response cache");
    add_path(*serve, flags, "--tools", "tools", "tool corpus to preload");

    auto* eval = sub("eval", "score samples or transcripts with a judge", cmd_eval);
    add_backend_flags(*eval, flags);
    eval->add_option("--in", flags.inputs, "sample files")->expected(1, -1);
    eval->add_option("--format", flags.format, "table or csv")->check(CLI::IsMember({"table", "csv"}));
    add_override<bool>(*eval, flags, "--fail-fast", "eval.fail_fast", "skip judges after deterministic failures");
    add_path(*eval, flags, "--tools", "tools", "tool corpus");
    add_path(*eval, flags, "--out", "out", "report file (default: stdout)");

    auto* bench = sub("bench", "latency of the gateway versus a synthetic remote tool", cmd_bench);
    add_backend_flags(*bench, flags);
    add_override<std::size_t>(*bench, flags, "--requests", "bench.requests", "workload size");
    add_override<std::size_t>(*bench, flags, "--concurrency", "bench.concurrency", "parallel callers");
    add_override<double>(*bench, flags, "--remote-latency", "bench.remote_latency", "seconds, 0 = no remote");
    add_override<std::size_t>(*bench, flags, "--remote-rate", "bench.remote_rate_limit", "remote requests/minute");
    add_override<double>(*bench, flags, "--mock-delay-ms", "backend.mock_delay_ms", "mock service time");
    add_path(*bench, flags, "--tools", "tools", "tool corpus");
    add_path(*bench, flags, "--url", "url", "benchmark a running gateway instead");
    add_path(*bench, flags, "--out", "out", "CSV output (default: stdout)");

    auto* overlap = sub("overlap", "embedding overlap between two tool corpora", cmd_overlap);
    add_override<double>(*overlap, flags, "--threshold", "overlap.threshold", "match threshold");
    add_override<std::string>(*overlap, flags, "--embedder", "embedder.kind", "hashing or backend");
    add_backend_flags(*overlap, flags);
    add_path(*overlap, flags, "--a", "a", "first corpus");
    add_path(*overlap, flags, "--b", "b", "second corpus");
    add_path(*overlap, flags, "--out", "out", "embedding coordinates CSV");

    auto* stats = sub("stats", "summarise a sample or tool corpus", cmd_stats);
    add_path(*stats, flags, "--in", "in", "corpus file");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
        try {
            app.parse(rev);
        } catch (const CLI::CallForHelp&) {
            out << app.help();
            return kExitOk;
        } catch (const CLI::CallForVersion&) {
            out << "0.3.0\n";
            return kExitOk;
        } catch (const CLI::ParseError& e) {
            for (const auto& c : commands) {
                if (c.app->parsed() && e.get_name() == "CallForHelp") {
                    out << c.app->help();
                    return kExitOk;
                }
            }
            err << "error: " << e.what() << "\n";
            return kExitConfig;
        }
        for (const auto& c : commands) {
            if (!c.app->parsed()) continue;
            Run run(c.app->get_name(),
                    layered_config(flags.config ? std::optional<fs::path>(*flags.config) : std::nullopt, flags.overrides),
                    out, err);
            c.handler(run, flags);
            run.write_manifest();
            return kExitOk;
        }
        return kExitConfig;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const PreconditionError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const InapplicableError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ToolNotFound& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const BackendError& e) {
        err << "backend error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        return kExitRuntime;
    } catch (const IoError& e) {
        err << "io error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const GenerationError& e) {
        err << "generation failed: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

int run(const std::vector<std::string>& args) { return run(args, std::cout, std::cerr); }

} // namespace toolweaver::cli
