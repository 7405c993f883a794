#include "generators.hpp"

#include <toolweaver/backend.hpp>
#include <toolweaver/errors.hpp>
#include <toolweaver/mock_backend.hpp>
#include <toolweaver/prompts.hpp>
#include <toolweaver/validation.hpp>

#include <doctest.h>
#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <thread>

using namespace toolweaver;
using namespace tw_test;

namespace {

GenerationRequest ask(const std::string& text, const std::string& tag = "test") {
    return GenerationRequest::make(tag, "system", text);
}

BackendConfig fast_config() {
    BackendConfig c = MockBackend::default_config();
    c.backoff_base = 1.0;
    c.max_retries = 3;
    return c;
}

} // namespace

TEST_CASE("mock picks the longest matching pattern") {
    MockBackend mock;
    mock.add_rule("weather", "short").add_rule("weather in Paris", "long");
    CHECK(mock.generate(ask("what is the weather in Paris today")).text == "long");
    CHECK(mock.generate(ask("weather?")).text == "short");
    CHECK_THROWS_AS(mock.generate(ask("nothing matches")), BackendError);
    CHECK(mock.calls("test") == 3);
}

TEST_CASE("fallback answers when no rule matches") {
    MockBackend mock;
    mock.set_fallback([](const GenerationRequest& r) { return "echo:" + std::string(r.last_user_content()); });
    CHECK(mock.generate(ask("hi")).text == "echo:hi");
}

TEST_CASE("scripted timeouts are retried with exponential backoff on the injected clock") {
    SimulatedClock clock;
    MockBackend mock({}, fast_config(), clock);
    mock.add_rule("flaky", "finally", 2);
    const auto start = clock.now();
    const auto r = mock.generate(ask("flaky call"));
    CHECK(r.text == "finally");
    CHECK(r.retries == 2);
    CHECK(to_seconds(clock.now() - start) == doctest::Approx(1.0 + 2.0));
    CHECK(mock.calls() == 3);
    CHECK(mock.total_retries() == 2);
}

TEST_CASE("retry budget exhaustion reports the last cause") {
    SimulatedClock clock;
    MockBackend mock({}, fast_config(), clock);
    mock.add_rule("down", "never", 100);
    try {
        mock.generate(ask("down"));
        FAIL("expected BackendError");
    } catch (const BackendError& e) {
        CHECK(e.kind() == BackendErrorKind::retries_exhausted);
        CHECK(e.cause() == BackendErrorKind::timeout);
    }
    CHECK(mock.calls() == 4);
}

TEST_CASE("request preconditions") {
    MockBackend mock;
    mock.add_rule("", "x");
    GenerationRequest empty;
    CHECK_THROWS_AS(mock.generate(empty), PreconditionError);
    auto r = ask("a");
    r.temperature = 2.5;
    CHECK_THROWS_AS(mock.generate(r), PreconditionError);
    CHECK_THROWS_AS(mock.embed(std::vector<std::string>{}), PreconditionError);
    BackendConfig bad;
    bad.timeout = 0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("default temperatures by tag prefix") {
    CHECK(default_temperature(tags::judge_logic) == 0.0);
    CHECK(default_temperature(tags::simulate) == doctest::Approx(0.3));
    CHECK(default_temperature(tags::single_generate) == doctest::Approx(0.8));
}

TEST_CASE("mock script parsing") {
    const auto rules = parse_mock_script(R"({"pattern":"a","response":"b"}
{"pattern":"c","response":"d","fail_times":2})");
    REQUIRE(rules.size() == 2);
    CHECK(rules[1].fail_times == 2);
    CHECK_THROWS_AS(parse_mock_script("{\"pattern\":1}"), ParseError);
}

TEST_CASE("credential only comes from the environment") {
    ::setenv(kApiKeyEnv, "sk-test", 1);
    CHECK(credential_from_env() == "sk-test");
    ::unsetenv(kApiKeyEnv);
    CHECK(credential_from_env().empty());
}

TEST_CASE("rate-limited backend spaces calls on the virtual clock") {
    SimulatedClock clock;
    BackendConfig c = fast_config();
    c.rate_limit = 2;
    MockBackend mock({}, c, clock);
    mock.add_rule("", "ok");
    const auto t0 = clock.now();
    for (int i = 0; i < 5; ++i) mock.generate(ask("x"));
    CHECK(to_seconds(clock.now() - t0) == doctest::Approx(120.0));
}

TEST_CASE("judge protocol parses verdicts and re-asks once") {
    CHECK(parse_judge_verdict("PASS")->passed());
    CHECK(parse_judge_verdict("**fail**: contradictory dates")->reason == "contradictory dates");
    CHECK_FALSE(parse_judge_verdict("maybe"));

    MockBackend mock;
    mock.add_rule("judge me", "I think it is fine");
    mock.add_rule("could not be parsed", "PASS");
    CHECK(ask_judge(mock, ask("judge me", tags::judge_logic)).passed());
    CHECK(mock.calls(tags::judge_logic) == 2);

    MockBackend stubborn;
    stubborn.add_rule("", "no idea");
    const auto r = ask_judge(stubborn, ask("judge me", tags::judge_logic));
    CHECK(r.status == CheckStatus::fail);
    CHECK(r.reason == "judge unparseable");
    CHECK(stubborn.calls() == 2);
}

TEST_CASE("prompt templates render known placeholders only") {
    CHECK(render_template("a {x} {y} {\"json\": 1}", {{"x", "1"}}) == "a 1 {y} {\"json\": 1}");
    for (const auto& name : PromptTemplates::names()) CHECK_FALSE(PromptTemplates::defaults().raw(name).empty());
    const auto req = PromptTemplates::defaults().request("judge_logic", tags::judge_logic,
                                                         {{"arguments", "{}"}, {"output", "{}"}});
    CHECK(req.messages.size() == 2);
    CHECK(req.tag == tags::judge_logic);
    CHECK(req.temperature == 0.0);
}

// ---- HTTP provider against an in-process server ----

struct FakeProvider {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<int> chat_calls{0};
    std::atomic<int> fail_first{0};
    std::string last_auth;

    FakeProvider() {
        server.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            ++chat_calls;
            last_auth = req.get_header_value("Authorization");
            if (fail_first > 0) {
                --fail_first;
                res.status = 503;
                return;
            }
            const auto body = Json::parse(req.body);
            if (body.value("model", "") == "bad") {
                res.status = 400;
                return;
            }
            const std::string content = "echo:" + body["messages"].back()["content"].get<std::string>();
            res.set_content(Json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}},
                                 {"usage", {{"prompt_tokens", 3}, {"completion_tokens", 4}}}}
                                .dump(),
                            "application/json");
        });
        server.Post("/v1/embeddings", [](const httplib::Request& req, httplib::Response& res) {
            const auto body = Json::parse(req.body);
            Json data = Json::array();
            for (std::size_t i = 0; i < body["input"].size(); ++i) data.push_back({{"embedding", {1.0, double(i), 0.0}}});
            res.set_content(Json{{"data", data}}.dump(), "application/json");
        });
        server.Get("/v1/models", [](const httplib::Request&, httplib::Response& res) {
            res.set_content("{\"data\":[]}", "application/json");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~FakeProvider() {
        server.stop();
        thread.join();
    }

    BackendConfig config() const {
        BackendConfig c;
        c.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
        c.backoff_base = 0.0;
        c.timeout = 5.0;
        c.embed_batch = 2;
        return c;
    }
};

TEST_CASE("HttpBackend speaks the chat-completion protocol") {
    FakeProvider fake;
    BackendConfig c = fake.config();
    c.credential = "secret";
    HttpBackend backend(c);
    CHECK(backend.health_check());
    const auto r = backend.generate(ask("hello"));
    CHECK(r.text == "echo:hello");
    CHECK(r.prompt_tokens == 3);
    CHECK(fake.last_auth == "Bearer secret");

    const std::vector<std::string> texts{"a", "b", "c"};
    const auto v = backend.embed(texts);
    CHECK(v.size() == 3);
    CHECK(v[2] == EmbeddingVector({1.0, 0.0, 0.0})); // second batch restarts at index 0
}

TEST_CASE("HttpBackend retries 5xx and fails fast on 4xx") {
    FakeProvider fake;
    fake.fail_first = 2;
    HttpBackend backend(fake.config());
    CHECK(backend.generate(ask("x")).retries == 2);
    CHECK(fake.chat_calls == 3);

    BackendConfig c = fake.config();
    c.model_name = "bad";
    HttpBackend bad(c);
    fake.chat_calls = 0;
    try {
        bad.generate(ask("x"));
        FAIL("expected BackendError");
    } catch (const BackendError& e) {
        CHECK(e.kind() == BackendErrorKind::non_retryable);
    }
    CHECK(fake.chat_calls == 1);
}

TEST_CASE("unreachable provider is a transient failure that exhausts retries") {
    BackendConfig c;
    c.base_url = "http://127.0.0.1:1/v1";
    c.backoff_base = 0.0;
    c.max_retries = 1;
    c.timeout = 1.0;
    HttpBackend backend(c);
    CHECK_FALSE(backend.health_check());
    CHECK_THROWS_AS(backend.generate(ask("x")), BackendError);
}
