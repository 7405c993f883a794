#include "generators.hpp"

#include <toolweaver/carg_error.hpp>
#include <toolweaver/carg_multi.hpp>
#include <toolweaver/carg_single.hpp>
#include <toolweaver/dataset_io.hpp>
#include <toolweaver/errors.hpp>
#include <toolweaver/tool_registry.hpp>

#include <doctest.h>

#include <filesystem>

using namespace toolweaver;
using namespace tw_test;
namespace fs = std::filesystem;

namespace {

std::vector<Sample> small_corpus(const ToolSpec& t) {
    auto mock = world_mock();
    std::vector<Sample> out;
    const auto singles = run_single_turn(t, *mock, {.quota = 2, .max_attempts = 3, .rng_seed = 1}).samples;
    for (const auto& s : singles) out.emplace_back(s);
    for (const auto& s : run_error_generation({t}, singles, *mock, {.per_tool = 2, .rng_seed = 1}, 1).samples) out.emplace_back(s);
    return out;
}

} // namespace

TEST_CASE("sample sink round-trips every scenario") {
    const ToolSpec t = weather_tool();
    auto samples = small_corpus(t);
    MultiTurnOptions opts;
    opts.samples = 1;
    opts.rng_seed = 2;
    ToolSpec other = weather_tool();
    other.api_name = "get_air_quality";
    HashingEmbedder e;
    auto mock = world_mock();
    for (const auto& m : run_multi_turn({t, other}, e, *mock, opts, 1).samples) samples.emplace_back(m);
    const std::string text = serialize_samples(samples);
    CHECK(parse_samples(text) == samples);
    CHECK(serialize_samples(parse_samples(text)) == text);
    CHECK_THROWS_WITH_AS(parse_samples(text + "{oops\n"), doctest::Contains("line"), ParseError);
}

TEST_CASE("SFT records carry spec, call and reply") {
    const ToolSpec t = weather_tool();
    const auto samples = small_corpus(t);
    const ToolRegistry reg({t});
    const auto rec = make_sft_record(samples.front(), reg);
    REQUIRE(rec.messages.size() == 3);
    CHECK(rec.messages[0].role == Role::system);
    CHECK(rec.messages[0].content.find(canonical_serialize(t)) != std::string::npos);
    const auto& single = std::get<SingleTurnSample>(samples.front());
    CHECK(rec.messages[1].content == "ARGUMENTS:\n" + canonical_dump(single.input.arguments));
    CHECK(rec.messages[2].content == canonical_dump(single.output.to_json()));
    CHECK(sft_record_from_json(to_json(rec)) == rec);

    const auto& err = std::get<ErrorSample>(samples.back());
    CHECK(make_sft_record(samples.back(), reg).messages[2].content == err.message);
}

TEST_CASE("export refuses failed samples and unknown tools") {
    const ToolSpec t = weather_tool();
    auto samples = small_corpus(t);
    const ToolRegistry reg({t});
    CHECK_THROWS_AS(make_sft_record(samples.front(), ToolRegistry()), PreconditionError);
    std::get<SingleTurnSample>(samples.front()).verdict.sem = CheckResult::fail("x");
    CHECK_THROWS_WITH_AS(render_sft(samples, reg), doctest::Contains(sample_id(samples.front()).c_str()), ValidationError);
}

TEST_CASE("export is ordered by scenario, tool and sample id") {
    const ToolSpec t = weather_tool();
    auto samples = small_corpus(t);
    std::reverse(samples.begin(), samples.end());
    const auto path = fs::temp_directory_path() / "tw_export_test.jsonl";
    CHECK(export_sft(samples, ToolRegistry({t}), path) == samples.size());
    std::istringstream in(read_file(path));
    std::vector<std::pair<std::string, std::string>> keys;
    for (std::string line; std::getline(in, line);) {
        const auto meta = Json::parse(line)["meta"];
        keys.emplace_back(meta["scenario"], meta["sample_id"]);
    }
    CHECK(std::is_sorted(keys.begin(), keys.end()));
    fs::remove(path);
}

TEST_CASE("file writes are atomic replacements") {
    const auto path = fs::temp_directory_path() / "tw_atomic.txt";
    write_file(path, "one");
    write_file(path, "two");
    CHECK(read_file(path) == "two");
    CHECK_THROWS_AS(write_file(path / "child.txt", "x"), IoError); // parent is a regular file
    fs::remove(path);
    CHECK_THROWS_AS(read_file(path), IoError);
}

TEST_CASE("mapping profiles import foreign corpora") {
    const auto profile = MappingProfile::parse(R"(# sample profile
name = function.name
description = function.description
params = function.parameters
required = function.required
field = category)");
    const std::string corpus = R"([
 {"category":"web","function":{"name":"search","description":"Search","parameters":{"properties":{"q":{"type":"str","description":"query"}}},"required":["q"]}},
 {"function":{"description":"no name"}}
])";
    const auto imported = import_foreign_text(corpus, profile);
    REQUIRE(imported.records.size() == 1);
    CHECK(imported.records[0].name == "search");
    CHECK(imported.records[0].field == "web");
    CHECK(imported.records[0].parameters[0].type == "str");
    REQUIRE(imported.issues.size() == 1);
    CHECK(imported.issues[0].record == 2);

    CHECK_THROWS_AS(import_foreign_text(corpus, MappingProfile::parse("name = a")), ValidationError);

    const auto native = import_foreign_text(canonical_serialize(weather_tool()), MappingProfile::native());
    REQUIRE(native.records.size() == 1);
    CHECK(import_external(native.records, nullptr)[0].parameters == weather_tool().parameters);
}

TEST_CASE("corpus stats count scenarios, fields and parameter arity") {
    const ToolSpec t = weather_tool();
    const auto s = corpus_stats_text(serialize_samples(small_corpus(t)));
    CHECK(s.count == 4);
    CHECK(s.scenarios.at("single") == 2);
    CHECK(s.scenarios.at("error") == 2);
    CHECK(s.scenarios.at("multi") == 0);
    const auto tools = corpus_stats_text(serialize_tool_corpus({t, t}));
    CHECK(tools.fields.at("weather") == 2);
    CHECK(tools.parameter_histogram.at(3) == 2);
    CHECK_THROWS_WITH_AS(corpus_stats_text(canonical_serialize(weather_tool()) + "\nnot json\n"), doctest::Contains("line 2"), ParseError);
}
