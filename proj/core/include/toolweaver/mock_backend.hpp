#pragma once

#include "toolweaver/backend.hpp"

#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace toolweaver {

/// One scripted behaviour: when `pattern` is the longest rule pattern contained in the last
/// user message, reply with `response`, after failing the first `fail_times` matching calls
/// with a timeout.
struct MockRule {
    std::string pattern;
    std::string response;
    std::size_t fail_times = 0;
};

/// Parses a mock script: one {"pattern", "response", "fail_times"?} record per line.
std::vector<MockRule> parse_mock_script(std::string_view text);

/// Replies for requests no rule matches. Must be a pure function of the request.
using MockResponder = std::function<std::string(const GenerationRequest&)>;

/// Deterministic scripted backend. Replies depend only on the rule set and the request
/// (apart from the fail_times countdown), so concurrent callers observe identical results.
/// Embeddings come from hashing_embedder.
class MockBackend final : public Backend {
public:
    explicit MockBackend(std::vector<MockRule> rules = {}, BackendConfig config = default_config(),
                         Clock& clock = steady_clock());

    static BackendConfig default_config();

    MockBackend& add_rule(MockRule rule);
    MockBackend& add_rule(std::string pattern, std::string response, std::size_t fail_times = 0);
    void set_fallback(MockResponder responder);
    /// Simulated service time added to every successful generate call.
    void set_delay(Clock::duration delay) { delay_ = delay; }
    void set_embedding_dim(std::size_t dim) { embedding_dim_ = dim; }

    /// Completed transport attempts (successes and scripted failures), total and by tag.
    std::size_t calls() const;
    std::size_t calls(std::string_view tag) const;
    /// Transport attempts whose tag starts with `prefix`.
    std::size_t calls_with_prefix(std::string_view prefix) const;
    std::vector<GenerationRequest> requests() const;
    void reset_counters();

protected:
    GenerationResult do_generate(const GenerationRequest& request) override;
    std::vector<std::vector<double>> do_embed(std::span<const std::string> texts) override;

private:
    std::vector<MockRule> rules_;
    std::vector<std::size_t> failures_left_;
    MockResponder fallback_;
    Clock::duration delay_{0};
    std::size_t embedding_dim_ = 256;

    mutable std::mutex mutex_;
    std::map<std::string, std::size_t, std::less<>> calls_by_tag_;
    std::vector<GenerationRequest> log_;
};

} // namespace toolweaver
