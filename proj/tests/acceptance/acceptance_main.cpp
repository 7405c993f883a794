// Acceptance gate: one PASS/FAIL line per criterion. Usage: toolweaver_acceptance [N...]

#include "generators.hpp"

#include <toolweaver/carg_error.hpp>
#include <toolweaver/carg_multi.hpp>
#include <toolweaver/carg_single.hpp>
#include <toolweaver/cli/cli.hpp>
#include <toolweaver/dataset_io.hpp>
#include <toolweaver/eval.hpp>
#include <toolweaver/gateway.hpp>
#include <toolweaver/latency.hpp>
#include <toolweaver/tool_registry.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

using namespace toolweaver;
using namespace tw_test;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Gate {
    int number;
    const char* title;
    double budget_s;
    std::function<Outcome()> run;
};

// ---- 1 ---------------------------------------------------------------------------------------

struct TableRow {
    const char* model;
    double single_all, multi_all, error_all, printed_avg;
};

// Per-scenario All columns and the bold Avg column of the model evaluation table.
constexpr TableRow kTable[] = {
    {"Qwen2.5-0.5B-Instruct", 78.1, 33.4, 23.9, 45.1},
    {"Qwen2.5-1.5B-Instruct", 90.3, 53.0, 40.2, 61.2},
    {"Qwen2.5-3B-Instruct", 89.6, 65.8, 40.7, 65.3},
    {"Qwen2.5-7B-Instruct", 98.8, 85.6, 64.7, 83.0},
    {"Qwen2.5-14B-Instruct", 98.8, 84.0, 74.6, 85.8},
    {"Llama-3.2-1B-Instruct", 45.6, 13.4, 20.6, 39.8},
    {"Llama-3.2-3B-Instruct", 89.3, 58.3, 57.5, 68.3},
    {"InternLM2.5-1.8B", 3.0, 5.2, 24.2, 10.8},
    {"InternLM2.5-7B", 53.6, 32.4, 31.8, 39.2},
    {"InternLM2.5-20B", 81.8, 68.5, 58.1, 69.4},
    {"GTM-1.5B", 95.5, 86.7, 86.1, 89.4},
};
constexpr double kAvgTolerance = 0.05;

Outcome table_avg() {
    std::ostringstream d;
    std::size_t bad = 0;
    for (const auto& row : kTable) {
        const double avg = round_half_up_1dp(average_of_all(row.single_all, row.multi_all, row.error_all));
        if (std::abs(avg - row.printed_avg) > kAvgTolerance + 1e-9) {
            ++bad;
            d << " " << row.model << " " << avg << "≠" << row.printed_avg << ";";
        }
    }
    std::ostringstream out;
    out << (std::size(kTable) - bad) << "/" << std::size(kTable) << " rows within ±" << kAvgTolerance;
    if (bad) out << " (mismatch:" << d.str() << ")";
    return {bad == 0, out.str()};
}

// ---- 2 ---------------------------------------------------------------------------------------

Outcome detectability() {
    constexpr std::size_t kCases = 1200;
    Rng rng(2024);
    auto mock = world_mock();
    std::map<ErrorKind, std::pair<std::size_t, std::size_t>> tally; // kind → (ok, total)
    for (std::size_t c = 0; c < kCases; ++c) {
        const ToolSpec spec = random_spec(rng, 6, true);
        const Json valid = random_valid_arguments(rng, spec);
        const ToolOutput out = placeholder_output(spec);
        for (ErrorKind kind : applicable_kinds(spec, valid)) {
            Json bad;
            try {
                switch (kind) {
                case ErrorKind::type_error: bad = inject_type_error(spec, valid, rng); break;
                case ErrorKind::missing_required: bad = inject_missing_required(spec, valid, rng); break;
                case ErrorKind::excess_param: bad = inject_excess_param(spec, valid, rng); break;
                case ErrorKind::invalid_value: bad = inject_invalid_value(spec, valid, *mock, rng); break;
                }
            } catch (const InapplicableError&) {
                continue;
            }
            auto& [ok, total] = tally[kind];
            ++total;
            const CheckResult verdict = validate_format(spec, {spec.id(), bad}, out);
            const auto issues = check_arguments(spec, bad);
            if (is_structural(kind)) {
                if (!verdict.passed() && !issues.empty() && issues.front().kind == expected_issue(kind)) ++ok;
            } else if (verdict.passed()) {
                ++ok;
            }
        }
    }
    bool pass = true;
    std::ostringstream d;
    d << kCases << " cases;";
    for (ErrorKind k : kAllErrorKinds) {
        const auto [ok, total] = tally[k];
        d << " " << to_string(k) << " " << ok << "/" << total;
        if (total == 0 || ok != total) pass = false;
    }
    return {pass, d.str()};
}

// ---- 3 ---------------------------------------------------------------------------------------

Outcome dedup_equivalence() {
    static const std::vector<std::string> stems = {"get",  "fetch", "list",  "weather", "stock", "price",
                                                   "city", "quote", "track", "order",   "flight", "hotel"};
    Rng rng(77);
    HashingEmbedder embedder(256);
    std::size_t runs = 0, agree = 0, with_removals = 0;
    for (std::size_t corpus = 0; corpus < 200; ++corpus) {
        const std::size_t n = 1 + rng.uniform_index(50);
        std::vector<ToolSpec> tools;
        std::vector<std::string> names;
        for (std::size_t i = 0; i < n; ++i) {
            ToolSpec t = random_spec(rng, 2);
            t.api_name = stems[rng.uniform_index(stems.size())] + "_" + stems[rng.uniform_index(stems.size())];
            if (rng.uniform_index(3) == 0) t.api_name += "_" + random_word(rng, 1, 3);
            tools.push_back(t);
            names.push_back(t.api_name);
        }
        std::vector<EmbeddingVector> vectors;
        for (const auto& name : names) vectors.push_back(hashing_embedder(name, 256));
        for (double threshold : {0.5, 0.8, 0.95}) {
            ++runs;
            const auto result = deduplicate(tools, embedder, threshold, DedupKey::name);
            const auto oracle = dedup_oracle(vectors, threshold);
            std::vector<std::string> expected;
            for (auto i : oracle) expected.push_back(tools[i].id());
            std::vector<std::string> got;
            for (const auto& t : result.kept) got.push_back(t.id());
            if (got == expected && result.removed.size() + result.kept.size() == n) ++agree;
            if (!result.removed.empty()) ++with_removals;
        }
    }
    std::ostringstream d;
    d << agree << "/" << runs << " (corpus, threshold) runs match the oracle; " << with_removals
      << " runs removed something";
    return {agree == runs, d.str()};
}

// ---- 4 ---------------------------------------------------------------------------------------

Outcome coherence_formula() {
    std::ostringstream d;
    bool pass = true;
    EmbeddingMap m;
    m["a"] = EmbeddingVector::basis(8, 0);
    m["b"] = EmbeddingVector::basis(8, 0);
    m["c"] = EmbeddingVector::basis(8, 1);
    const double single = coherence({"a"}, m);
    const double same = coherence({"a", "b"}, m);
    const double ortho = coherence({"a", "c"}, m);
    if (single != 1.0 || same != 1.0 || ortho != 0.5) pass = false;
    d << "singleton " << single << ", identical " << same << ", orthogonal " << ortho << ";";

    Rng rng(4);
    std::size_t within = 0;
    constexpr std::size_t kTrials = 1000;
    for (std::size_t trial = 0; trial < kTrials; ++trial) {
        const std::size_t n = 1 + rng.uniform_index(10);
        const std::size_t dim = 2 + rng.uniform_index(30);
        EmbeddingMap map;
        std::vector<std::string> ids;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> v(dim, 0.0);
            for (auto& x : v) x = rng.uniform_index(3) == 0 ? 0.0 : rng.uniform_real();
            v[rng.uniform_index(dim)] += 0.1;
            ids.push_back("t" + std::to_string(i));
            map[ids.back()] = EmbeddingVector(v);
        }
        const double c = coherence(ids, map);
        if (c >= 1.0 / static_cast<double>(n) - 1e-12 && c <= 1.0 + 1e-12) ++within;
    }
    d << " " << within << "/" << kTrials << " random groups within [1/|G|, 1]";
    return {pass && within == kTrials, d.str()};
}

// ---- 5 ---------------------------------------------------------------------------------------

int cli(const std::vector<std::string>& args) {
    std::vector<std::string> argv{"toolweaver"};
    argv.insert(argv.end(), args.begin(), args.end());
    std::ostringstream out, err;
    const int rc = toolweaver::cli::run(argv, out, err);
    if (rc != 0) std::cerr << "  toolweaver " << args.front() << " failed: " << err.str();
    return rc;
}

bool pipeline(const fs::path& dir) {
    fs::create_directories(dir);
    auto p = [&](const char* name) { return (dir / name).string(); };
    const std::string seed = "11";
    return cli({"taxonomy", "--seed", seed, "--target-fields", "5", "--subfields", "2", "--out", p("taxonomy.json")}) == 0 &&
           cli({"gen-tools", "--seed", seed, "--taxonomy", p("taxonomy.json"), "--count", "3", "--out", p("raw.jsonl")}) == 0 &&
           cli({"dedup", "--in", p("raw.jsonl"), "--out", p("tools.jsonl")}) == 0 &&
           cli({"carg-single", "--seed", seed, "--tools", p("tools.jsonl"), "--quota", "2", "--out", p("single.jsonl")}) == 0 &&
           cli({"carg-multi", "--seed", seed, "--tools", p("tools.jsonl"), "--samples", "10", "--out", p("multi.jsonl")}) == 0 &&
           cli({"carg-error", "--seed", seed, "--tools", p("tools.jsonl"), "--single", p("single.jsonl"), "--per-tool", "1",
                "--out", p("error.jsonl")}) == 0 &&
           cli({"export", "--tools", p("tools.jsonl"), "--in", p("single.jsonl"), p("multi.jsonl"), p("error.jsonl"),
                "--out", p("sft.jsonl")}) == 0;
}

Outcome end_to_end() {
    const fs::path root = fs::temp_directory_path() / ("tw_accept_" + std::to_string(::getpid()));
    fs::remove_all(root);
    if (!pipeline(root / "a") || !pipeline(root / "b")) return {false, "pipeline command failed"};

    std::vector<std::string> differing;
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(root / "a")) {
        ++files;
        const auto name = entry.path().filename();
        if (read_file(entry.path()) != read_file(root / "b" / name)) differing.push_back(name.string());
    }

    const auto tools = parse_tool_corpus(read_file(root / "a" / "tools.jsonl"));
    std::map<std::string, ToolSpec, std::less<>> by_id;
    for (const auto& t : tools) by_id[t.id()] = t;
    auto judge = world_mock();
    std::size_t single = 0, multi = 0, error = 0, revalidated = 0, total = 0;
    for (const char* file : {"single.jsonl", "multi.jsonl", "error.jsonl"}) {
        for (const auto& s : parse_samples(read_file(root / "a" / file))) {
            ++total;
            bool ok = false;
            if (const auto* x = std::get_if<SingleTurnSample>(&s)) {
                ++single;
                const auto v = validate_pair(by_id.at(x->tool_id), x->input, x->output, *judge);
                ok = v.passed() && v == x->verdict;
            } else if (const auto* x = std::get_if<MultiTurnSample>(&s)) {
                ++multi;
                const auto v = validate_multi(*x, by_id.at(x->target_id()), *judge);
                ok = v.passed() && v == x->verdict;
            } else if (const auto* x = std::get_if<ErrorSample>(&s)) {
                ++error;
                const auto v = validate_error_sample(*x, by_id.at(x->tool_id), *judge);
                ok = v.passed() && v == x->verdict;
            }
            if (ok) ++revalidated;
        }
    }
    fs::remove_all(root);

    std::ostringstream d;
    d << tools.size() << " tools, " << single << " single, " << multi << " multi, " << error << " error; "
      << revalidated << "/" << total << " re-validate; " << (files - differing.size()) << "/" << files
      << " files byte-identical across runs";
    for (const auto& f : differing) d << " [differs: " << f << "]";
    const bool pass = tools.size() >= 20 && single >= 30 && multi >= 10 && error >= 20 && revalidated == total &&
                      differing.empty();
    return {pass, d.str()};
}

// ---- 6 ---------------------------------------------------------------------------------------

Outcome gateway_contracts() {
    std::ostringstream d;
    bool pass = true;

    auto mock = world_mock();
    const ToolSpec weather = weather_tool();
    auto registry = std::make_shared<ToolRegistry>(std::vector<ToolSpec>{weather});
    auto gateway = std::make_shared<Gateway>(mock, registry);

    SimRequest invalid;
    invalid.tool_id = weather.id();
    invalid.arguments = {{"units", "metric"}};
    const auto r = gateway->simulate(invalid);
    const auto issues = check_arguments(weather, invalid.arguments);
    const bool invalid_ok = r.status == SimStatus::tool_error && !issues.empty() &&
                            r.error_message == template_error_message(issues.front()) && mock->calls() == 0;
    pass &= invalid_ok;
    d << "invalid call → " << to_string(r.status) << " \"" << r.error_message << "\", " << mock->calls()
      << " backend calls;";

    auto slow = world_mock();
    slow->set_delay(std::chrono::milliseconds(200));
    auto concurrent = std::make_shared<Gateway>(slow, registry);
    SimRequest valid;
    valid.tool_id = weather.id();
    valid.arguments = {{"city", "Lisbon"}, {"days", 2}};
    std::vector<std::string> payloads(64);
    {
        std::vector<std::jthread> threads;
        for (std::size_t i = 0; i < payloads.size(); ++i) {
            threads.emplace_back([&, i] {
                const auto resp = concurrent->simulate(valid);
                payloads[i] = resp.payload ? canonical_dump(resp.payload->to_json()) : "<none>";
            });
        }
    }
    const bool identical = std::all_of(payloads.begin(), payloads.end(),
                                       [&](const std::string& p) { return p == payloads.front() && p != "<none>"; });
    const std::size_t sims = concurrent->simulations();
    pass &= identical && sims <= 2;
    d << " 64 concurrent identical requests → " << sims << " backend simulation(s), payloads "
      << (identical ? "identical" : "DIFFER") << ";";

    Rng rng(6);
    auto any = std::make_shared<Gateway>(world_mock(), std::make_shared<ToolRegistry>());
    std::size_t ok = 0, conforming = 0;
    for (std::size_t i = 0; i < 300; ++i) {
        SimRequest req;
        req.tool = random_spec(rng, 5);
        req.arguments = random_valid_arguments(rng, *req.tool);
        const auto resp = any->simulate(req);
        if (resp.status != SimStatus::ok) continue;
        ++ok;
        if (resp.payload && check_output(*req.tool, *resp.payload).empty()) ++conforming;
    }
    pass &= ok > 0 && conforming == ok;
    d << " " << conforming << "/" << ok << " ok responses satisfy the response schema";
    return {pass, d.str()};
}

// ---- 7 ---------------------------------------------------------------------------------------

Outcome latency_direction() {
    constexpr double kRemoteLatency = 0.92;
    constexpr std::size_t kRemoteRate = 40;
    constexpr std::size_t kRequests = 100;
    constexpr std::size_t kConcurrency = 4;
    constexpr double kMinSpeedup = 6.0;

    auto mock = world_mock();
    mock->set_delay(std::chrono::milliseconds(120)); // local compact-model service time
    Rng rng(7);
    std::vector<ToolSpec> tools;
    for (int i = 0; i < 20; ++i) tools.push_back(random_spec(rng, 4));
    auto gateway = std::make_shared<Gateway>(mock, std::make_shared<ToolRegistry>(tools));
    std::vector<SimRequest> workload;
    for (std::size_t i = 0; i < kRequests; ++i) {
        SimRequest r;
        r.tool_id = tools[i % tools.size()].id();
        r.arguments = random_valid_arguments(rng, tools[i % tools.size()]);
        workload.push_back(std::move(r));
    }
    GatewayTarget target(gateway);
    const auto stats = latency_bench(target, workload, kConcurrency, RemoteProfile{kRemoteLatency, kRemoteRate});
    const double speedup = stats.speedup.value_or(0.0);
    std::ostringstream d;
    d.precision(3);
    d << "gateway mean " << stats.target.mean << " s, remote mean " << stats.remote->mean << " s, speedup "
      << speedup << "x (need ≥ " << kMinSpeedup << "x, " << gateway->simulations() << " simulations)";
    return {speedup >= kMinSpeedup, d.str()};
}

// ---- 8 ---------------------------------------------------------------------------------------

double nn_fraction(const std::vector<ToolSpec>& a, const std::vector<ToolSpec>& b, double threshold) {
    std::size_t matched = 0;
    for (const auto& x : a) {
        const auto ex = hashing_embedder(overlap_text(x), 256);
        double best = -2.0;
        for (const auto& y : b) {
            const auto ey = hashing_embedder(overlap_text(y), 256);
            double dot = 0.0;
            for (std::size_t i = 0; i < ex.dim(); ++i) dot += ex[i] * ey[i];
            best = std::max(best, dot);
        }
        if (best > threshold) ++matched;
    }
    return static_cast<double>(matched) / static_cast<double>(a.size());
}

Outcome overlap_sanity() {
    Rng rng(8);
    HashingEmbedder embedder(256);
    std::vector<ToolSpec> b;
    for (int i = 0; i < 200; ++i) b.push_back(random_spec(rng, 3));
    std::vector<ToolSpec> a;
    for (int i = 0; i < 40; ++i) a.push_back(b[static_cast<std::size_t>(i) * 5]); // 20% planted
    for (int i = 0; i < 160; ++i) a.push_back(random_spec(rng, 3));

    const auto self = corpus_overlap(a, a, embedder, 0.8);
    const auto planted = corpus_overlap(a, b, embedder, 0.8);
    const double oracle = nn_fraction(a, b, 0.8);
    const bool pass = self.fraction_a_matched == 1.0 && self.fraction_b_matched == 1.0 &&
                      std::abs(planted.fraction_a_matched - 0.20) <= 0.01 &&
                      planted.fraction_a_matched == oracle;
    std::ostringstream d;
    d << "overlap(A, A) = " << self.fraction_a_matched << "; planted 20% → " << planted.fraction_a_matched
      << " (oracle " << oracle << ")";
    return {pass, d.str()};
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<Gate> criteria = {
        {1, "published Avg arithmetic", 1.0, table_avg},
        {2, "structural injector detectability", 30.0, detectability},
        {3, "dedup oracle equivalence", 60.0, dedup_equivalence},
        {4, "coherence formula", 10.0, coherence_formula},
        {5, "end-to-end pipeline on the mock", 60.0, end_to_end},
        {6, "gateway contracts", 30.0, gateway_contracts},
        {7, "latency benchmark direction", 300.0, latency_direction},
        {8, "overlap analysis sanity", 30.0, overlap_sanity},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

    int failures = 0;
    for (const auto& c : criteria) {
        if (!selected.empty() && !selected.contains(c.number)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = elapsed < c.budget_s;
        const bool pass = o.pass && in_time;
        if (!pass) ++failures;
        std::printf("[%s] criterion %d: %s: %s (%.2f s, budget %.0f s%s)\n", pass ? "PASS" : "FAIL", c.number,
                    c.title, o.detail.c_str(), elapsed, c.budget_s, in_time ? "" : ", OVER BUDGET");
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
