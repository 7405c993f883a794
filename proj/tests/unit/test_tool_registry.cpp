#include "generators.hpp"

#include <toolweaver/errors.hpp>
#include <toolweaver/tool_registry.hpp>

#include <doctest.h>

#include <set>
#include <sstream>
#include <thread>

using namespace toolweaver;
using namespace tw_test;

TEST_CASE("taxonomy expansion keeps seeds, reaches the target and never duplicates") {
    auto mock = world_mock();
    TaxonomyOptions opts;
    opts.target_fields = 8;
    opts.subfields_per_field = 2;
    opts.rng_seed = 3;
    const auto tax = expand_taxonomy({"weather", "Finance"}, *mock, opts);
    REQUIRE(tax.size() == 8);
    CHECK(tax.fields[0].name == "weather");
    CHECK(tax.fields[0].seed);
    CHECK_FALSE(tax.fields[2].seed);
    std::set<std::string> lower;
    for (const auto& f : tax.fields) {
        CHECK(lower.insert(to_lower_ascii(f.name)).second);
        CHECK(f.subfields.size() == 2);
    }
    CHECK(tax.contains_field(" FINANCE "));
    CHECK(taxonomy_from_json(to_json(tax)) == tax);

    auto again = world_mock();
    CHECK(expand_taxonomy({"weather", "Finance"}, *again, opts) == tax);
}

TEST_CASE("taxonomy expansion gives up when the backend only repeats itself") {
    MockBackend mock;
    mock.add_rule("", "weather");
    TaxonomyOptions opts;
    opts.target_fields = 4;
    opts.max_stalled_rounds = 3;
    CHECK_THROWS_AS(expand_taxonomy({"weather", "finance"}, mock, opts), GenerationError);
}

TEST_CASE("generated tools always validate and carry their taxonomy slot") {
    auto mock = world_mock();
    ToolGenerationReport report;
    const auto tools = generate_tools("travel", "rail booking", *mock, {.count = 5, .max_attempts = 3, .rng_seed = 1}, &report);
    CHECK(tools.size() == 5);
    for (const auto& t : tools) {
        CHECK(validate_tool_spec(t).passed());
        CHECK(t.field == "travel");
        CHECK(t.subfield == "rail booking");
        CHECK(t.source == ToolSource::generated);
    }
}

TEST_CASE("tool generation drops unusable candidates") {
    MockBackend mock;
    mock.add_rule("", R"([{"api_name":"a","api_description":"d","parameters":{"p":{"type":"string","description":""}},"required":["missing"],"responses":{}},
                         {"api_name":"b","api_description":"d","parameters":{"p":{"type":"string","description":""}},"required":["p"],"responses":{}},
                         "junk"])");
    ToolGenerationReport report;
    const auto tools = generate_tools("f", "s", mock, {.count = 2, .max_attempts = 1}, &report);
    CHECK(tools.size() == 1);
    CHECK(tools[0].api_name == "b");
    CHECK(report.invalid == 1);
    CHECK(report.parse_drops == 1);
}

TEST_CASE("dedup equals the brute-force oracle and names the most similar survivor") {
    Rng rng(31);
    HashingEmbedder e(128);
    const std::vector<std::string> stems{"get", "weather", "list", "flights", "stock", "quote"};
    for (int trial = 0; trial < 60; ++trial) {
        std::vector<ToolSpec> tools;
        std::vector<EmbeddingVector> vecs;
        const std::size_t n = 1 + rng.uniform_index(25);
        for (std::size_t i = 0; i < n; ++i) {
            ToolSpec t = random_spec(rng, 2);
            t.api_name = stems[rng.uniform_index(6)] + "_" + stems[rng.uniform_index(6)];
            tools.push_back(t);
            vecs.push_back(hashing_embedder(t.api_name, 128));
        }
        const double threshold = 0.5 + 0.45 * rng.uniform_real();
        const auto r = deduplicate(tools, e, threshold);
        const auto oracle = dedup_oracle(vecs, threshold);
        REQUIRE(r.kept.size() == oracle.size());
        for (std::size_t i = 0; i < oracle.size(); ++i) CHECK(r.kept[i] == tools[oracle[i]]);
        for (const auto& rm : r.removed) {
            CHECK(rm.similarity > threshold);
            const auto removed = std::find_if(tools.begin(), tools.end(), [&](auto& t) { return t.id() == rm.removed_id; });
            double best = -2.0;
            std::string best_id;
            const auto ri = static_cast<std::size_t>(removed - tools.begin());
            for (auto k : oracle) {
                if (k > ri) break;
                const double c = cosine(vecs[ri], vecs[k]);
                if (c > best) {
                    best = c;
                    best_id = tools[k].id();
                }
            }
            CHECK(rm.kept_id == best_id);
        }
    }
}

TEST_CASE("dedup edge cases") {
    HashingEmbedder e;
    CHECK(deduplicate({}, e).kept.empty());
    const ToolSpec t = weather_tool();
    ToolSpec copy = t;
    copy.api_description = "another description";
    const auto r = deduplicate({t, copy}, e, 0.8);
    CHECK(r.kept.size() == 1);
    CHECK(r.removed[0].similarity == doctest::Approx(1.0));
    CHECK(deduplicate({t, copy}, e, 0.8, DedupKey::description).kept.size() == 2);
    CHECK(deduplicate({t, copy}, e, 1.0).kept.size() == 2);
    CHECK_THROWS_AS(deduplicate({t}, e, 1.5), PreconditionError);
}

TEST_CASE("foreign type names normalise onto the closed set") {
    CHECK(normalize_type_name("str") == TypeTag::string);
    CHECK(normalize_type_name("Int") == TypeTag::integer);
    CHECK(normalize_type_name("float") == TypeTag::number);
    CHECK(normalize_type_name("list") == TypeTag::array);
    CHECK(normalize_type_name("dict") == TypeTag::object);
    CHECK_FALSE(normalize_type_name("blob"));
}

TEST_CASE("import maps complete records directly and completes partial ones") {
    ForeignToolRecord full{"search", "Search the web", "web", std::nullopt,
                           {{"q", "str", "query"}}, {"q"}, std::vector<ForeignField>{{"hits", "list", ""}}};
    const auto direct = import_external({full}, nullptr);
    REQUIRE(direct.size() == 1);
    CHECK(direct[0].source == ToolSource::imported);
    CHECK(direct[0].parameters.at("q").type == TypeTag::string);

    ForeignToolRecord partial{"lookup", "Look up a stock quote", "finance", std::nullopt,
                              {{"symbol", std::nullopt, "ticker"}}, {"symbol"}, std::nullopt};
    CHECK_THROWS_AS(import_external({partial}, nullptr), PreconditionError);
    auto mock = world_mock();
    const auto completed = import_external({partial}, mock.get());
    REQUIRE(completed.size() == 1);
    CHECK(validate_tool_spec(completed[0]).passed());
    CHECK(mock->calls(tags::tools_complete) == 1);

    ForeignToolRecord nameless = full;
    nameless.name.clear();
    CHECK_THROWS_WITH_AS(import_external({full, nameless}, nullptr), doctest::Contains("record 2"), PreconditionError);
}

TEST_CASE("overlap fractions equal a nearest-neighbour scan") {
    Rng rng(41);
    HashingEmbedder e;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<ToolSpec> a, b;
        for (std::size_t i = 0; i < 1 + rng.uniform_index(20); ++i) b.push_back(random_spec(rng, 2));
        for (std::size_t i = 0; i < 1 + rng.uniform_index(20); ++i) {
            a.push_back(rng.uniform_index(3) == 0 ? b[rng.uniform_index(b.size())] : random_spec(rng, 2));
        }
        const double th = 0.8;
        auto frac = [&](const std::vector<ToolSpec>& x, const std::vector<ToolSpec>& y) {
            std::size_t m = 0;
            for (const auto& s : x) {
                double best = -2.0;
                for (const auto& t : y) best = std::max(best, cosine(hashing_embedder(overlap_text(s)), hashing_embedder(overlap_text(t))));
                m += best > th;
            }
            return static_cast<double>(m) / static_cast<double>(x.size());
        };
        const auto r = corpus_overlap(a, b, e, th);
        CHECK(r.fraction_a_matched == doctest::Approx(frac(a, b)));
        CHECK(r.fraction_b_matched == doctest::Approx(frac(b, a)));
        CHECK(r.coordinates.size() == a.size() + b.size());
    }
    CHECK_THROWS_AS(corpus_overlap({}, {weather_tool()}, e, 0.8), PreconditionError);
}

TEST_CASE("overlap csv header") {
    HashingEmbedder e(16);
    const auto r = corpus_overlap({weather_tool()}, {weather_tool()}, e, 0.8);
    std::ostringstream out;
    write_overlap_csv(r, out);
    const auto text = out.str();
    CHECK(text.rfind("id,corpus,dim_0,dim_1,", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}

TEST_CASE("registry validates, finds and tolerates concurrent writers") {
    ToolRegistry reg;
    ToolSpec bad = weather_tool();
    bad.required.push_back("nope");
    CHECK_THROWS_AS(reg.add(bad), ValidationError);
    const auto id = reg.add(weather_tool());
    CHECK(reg.find(id) == weather_tool());
    CHECK_FALSE(reg.find("t_missing"));

    Rng rng(51);
    std::vector<ToolSpec> specs;
    for (int i = 0; i < 200; ++i) specs.push_back(random_spec(rng));
    {
        std::vector<std::jthread> threads;
        for (int w = 0; w < 4; ++w) {
            threads.emplace_back([&, w] {
                for (std::size_t i = static_cast<std::size_t>(w); i < specs.size(); i += 4) {
                    reg.add(specs[i]);
                    reg.list();
                }
            });
        }
    }
    CHECK(reg.size() == 201);
}
