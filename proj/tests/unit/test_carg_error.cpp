#include "generators.hpp"

#include <toolweaver/carg_error.hpp>
#include <toolweaver/carg_single.hpp>
#include <toolweaver/errors.hpp>

#include <doctest.h>

using namespace toolweaver;
using namespace tw_test;

TEST_CASE("structural injectors are always detected with the matching class (property)") {
    Rng rng(12);
    for (int i = 0; i < 400; ++i) {
        const ToolSpec s = random_spec(rng, 6, true);
        const Json valid = random_valid_arguments(rng, s);
        for (ErrorKind k : {ErrorKind::type_error, ErrorKind::missing_required, ErrorKind::excess_param}) {
            Json bad;
            if (k == ErrorKind::type_error) bad = inject_type_error(s, valid, rng);
            if (k == ErrorKind::missing_required) bad = inject_missing_required(s, valid, rng);
            if (k == ErrorKind::excess_param) bad = inject_excess_param(s, valid, rng);
            CHECK(bad != valid);
            const auto issues = check_arguments(s, bad);
            REQUIRE_FALSE(issues.empty());
            CHECK(issues.front().kind == expected_issue(k));
            CHECK(error_format_check(s, k, bad).passed());
        }
    }
}

TEST_CASE("injectors change exactly one slot") {
    const ToolSpec t = weather_tool();
    const Json valid = {{"city", "Oslo"}, {"days", 3}, {"units", "metric"}};
    Rng rng(1);
    const Json typed = inject_type_error(t, valid, rng);
    int changed = 0;
    for (const auto& [k, v] : valid.items()) changed += typed.at(k) != v;
    CHECK(changed == 1);
    CHECK(inject_missing_required(t, valid, rng).size() == 2);
    const Json extra = inject_excess_param(t, valid, rng);
    CHECK(extra.at("extra_field") == "x");
    Json clash = valid;
    clash["extra_field"] = 1;
    ToolSpec t2 = t;
    t2.parameters["extra_field"] = {"extra_field", TypeTag::integer, ""};
    CHECK(inject_excess_param(t2, clash, rng).contains("extra_field_2"));
}

TEST_CASE("inapplicable and invalid preconditions") {
    ToolSpec t = weather_tool();
    t.required.clear();
    Rng rng(2);
    CHECK_THROWS_AS(inject_missing_required(t, {{"city", "x"}}, rng), InapplicableError);
    CHECK_THROWS_AS(inject_type_error(t, {{"city", 5}}, rng), PreconditionError);
    const auto kinds = applicable_kinds(t, {{"city", "x"}});
    CHECK(std::find(kinds.begin(), kinds.end(), ErrorKind::missing_required) == kinds.end());
    auto mock = world_mock();
    ToolSpec flags_only;
    flags_only.api_name = "toggle";
    flags_only.api_description = "d";
    flags_only.field = "f";
    flags_only.parameters["on"] = {"on", TypeTag::boolean, ""};
    CHECK_THROWS_AS(inject_invalid_value(flags_only, {{"on", true}}, *mock, rng), InapplicableError);
}

TEST_CASE("invalid_value keeps the type and re-asks once on a wrong type") {
    const ToolSpec t = weather_tool();
    const Json valid = {{"city", "Oslo"}};
    Rng rng(3);
    auto mock = world_mock();
    const Json bad = inject_invalid_value(t, valid, *mock, rng);
    CHECK(bad != valid);
    CHECK(check_arguments(t, bad).empty());

    MockBackend wrong;
    wrong.add_rule("", R"({"value": 12})");
    CHECK_THROWS_AS(inject_invalid_value(t, valid, wrong, rng), GenerationError);
    CHECK(wrong.calls(tags::error_invalid_value) == 2);
}

TEST_CASE("template messages") {
    const ToolSpec t = weather_tool();
    auto first = [&](const Json& a) { return template_error_message(check_arguments(t, a).front()); };
    CHECK(first({{"units", "m"}}) == "Error: missing required parameter 'city'");
    CHECK(first({{"city", "x"}, {"q", 1}}) == "Error: unexpected parameter 'q'");
    CHECK(first({{"city", 1}}) == "Error: parameter 'city' expected string, got integer");
}

TEST_CASE("message generation uses the template offline and falls back on backend failure") {
    const ToolSpec t = weather_tool();
    const Json valid = {{"city", "Oslo"}};
    const Json bad = {{"city", 4}};
    CHECK(generate_error_message(t, ErrorKind::type_error, valid, bad, nullptr) ==
          "Error: parameter 'city' expected string, got integer");
    MockBackend broken({}, [] {
        auto c = MockBackend::default_config();
        c.max_retries = 0;
        return c;
    }());
    broken.add_rule("", "x", 99);
    CHECK(generate_error_message(t, ErrorKind::type_error, valid, bad, &broken).rfind("Error:", 0) == 0);
    CHECK_THROWS_AS(generate_error_message(t, ErrorKind::type_error, valid, bad, &broken, {true, false}),
                    BackendError);
    CHECK_THROWS_AS(generate_error_message(t, ErrorKind::type_error, valid, valid, nullptr), PreconditionError);
    CHECK_THROWS_AS(generate_error_message(t, ErrorKind::missing_required, valid, bad, nullptr),
                    PreconditionError);
    CHECK_THROWS_AS(generate_error_message(t, ErrorKind::invalid_value, valid, {{"city", "Atlantis"}}, nullptr),
                    PreconditionError);
}

TEST_CASE("error validation short-circuits") {
    const ToolSpec t = weather_tool();
    ErrorSample s;
    s.tool_id = t.id();
    s.kind = ErrorKind::missing_required;
    s.valid_input = {t.id(), {{"city", "Oslo"}}};
    s.corrupted_input = {t.id(), {{"city", 1}}}; // a type error mislabelled as missing_required
    s.message = "Error: x";
    auto mock = world_mock();
    const auto v = validate_error_sample(s, t, *mock);
    CHECK(v.format.status == CheckStatus::fail);
    CHECK(v.exist.status == CheckStatus::skipped);
    CHECK(mock->calls() == 0);

    s.kind = ErrorKind::type_error;
    CHECK(validate_error_sample(s, t, *mock).passed());
    CHECK(mock->calls(tags::judge_exist) == 1);
    CHECK(mock->calls(tags::judge_quality) == 1);
    CHECK(error_sample_from_json(to_json(s)) == s);
}

TEST_CASE("run_error_generation round-robins kinds over valid inputs") {
    const ToolSpec t = weather_tool();
    auto mock = world_mock();
    const auto singles = run_single_turn(t, *mock, {.quota = 2, .max_attempts = 3, .rng_seed = 1}).samples;
    REQUIRE(singles.size() == 2);
    const auto c = run_error_generation({t}, singles, *mock, {.per_tool = 4, .rng_seed = 5}, 2);
    REQUIRE(c.samples.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(c.samples[i].kind == kAllErrorKinds[i]);
        CHECK(c.samples[i].sample_id == t.id() + "-e" + std::to_string(i));
        CHECK(c.samples[i].verdict.passed());
        CHECK(c.samples[i].valid_input == singles[i % 2].input);
    }
    auto again = world_mock();
    CHECK(run_error_generation({t}, singles, *again, {.per_tool = 4, .rng_seed = 5}, 1).samples == c.samples);
}
