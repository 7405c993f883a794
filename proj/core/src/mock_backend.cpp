#include "toolweaver/mock_backend.hpp"

#include "toolweaver/json_util.hpp"

namespace toolweaver {

std::vector<MockRule> parse_mock_script(std::string_view text) {
    std::vector<MockRule> rules;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        const std::string line = trim(text.substr(pos, nl == std::string_view::npos ? nl : nl - pos));
        ++line_no;
        if (!line.empty()) {
            Json record;
            try {
                record = parse_strict(line);
            } catch (const ParseError& e) {
                throw ParseError(e.what(), line_no);
            }
            if (!record.is_object() || !record.contains("pattern") ||
                !record["pattern"].is_string() || !record.contains("response") ||
                !record["response"].is_string()) {
                throw ParseError("mock rule needs string 'pattern' and 'response'", line_no);
            }
            MockRule rule{record["pattern"].get<std::string>(), record["response"].get<std::string>(), 0};
            if (const auto f = record.find("fail_times"); f != record.end()) {
                if (!f->is_number_unsigned()) {
                    throw ParseError("fail_times must be a non-negative integer", line_no);
                }
                rule.fail_times = f->get<std::size_t>();
            }
            rules.push_back(std::move(rule));
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return rules;
}

BackendConfig MockBackend::default_config() {
    BackendConfig config;
    config.base_url = "mock://";
    config.model_name = "mock";
    config.max_retries = 2;
    config.backoff_base = 0.0;
    config.max_concurrency = 64;
    return config;
}

MockBackend::MockBackend(std::vector<MockRule> rules, BackendConfig config, Clock& clock)
    : Backend(std::move(config), clock) {
    for (auto& rule : rules) add_rule(std::move(rule));
}

MockBackend& MockBackend::add_rule(MockRule rule) {
    std::lock_guard lock(mutex_);
    failures_left_.push_back(rule.fail_times);
    rules_.push_back(std::move(rule));
    return *this;
}

MockBackend& MockBackend::add_rule(std::string pattern, std::string response, std::size_t fail_times) {
    return add_rule(MockRule{std::move(pattern), std::move(response), fail_times});
}

void MockBackend::set_fallback(MockResponder responder) {
    std::lock_guard lock(mutex_);
    fallback_ = std::move(responder);
}

std::size_t MockBackend::calls() const {
    std::lock_guard lock(mutex_);
    return log_.size();
}

std::size_t MockBackend::calls(std::string_view tag) const {
    std::lock_guard lock(mutex_);
    const auto it = calls_by_tag_.find(tag);
    return it == calls_by_tag_.end() ? 0 : it->second;
}

std::size_t MockBackend::calls_with_prefix(std::string_view prefix) const {
    std::lock_guard lock(mutex_);
    std::size_t total = 0;
    for (const auto& [tag, n] : calls_by_tag_) {
        if (std::string_view(tag).starts_with(prefix)) total += n;
    }
    return total;
}

std::vector<GenerationRequest> MockBackend::requests() const {
    std::lock_guard lock(mutex_);
    return log_;
}

void MockBackend::reset_counters() {
    std::lock_guard lock(mutex_);
    log_.clear();
    calls_by_tag_.clear();
}

GenerationResult MockBackend::do_generate(const GenerationRequest& request) {
    const std::string_view prompt = request.last_user_content();
    std::string reply;
    bool fail = false;
    MockResponder fallback;
    {
        std::lock_guard lock(mutex_);
        log_.push_back(request);
        ++calls_by_tag_[request.tag];

        std::optional<std::size_t> best;
        for (std::size_t i = 0; i < rules_.size(); ++i) {
            if (prompt.find(rules_[i].pattern) == std::string_view::npos) continue;
            if (!best || rules_[i].pattern.size() > rules_[*best].pattern.size()) best = i;
        }
        if (best) {
            if (failures_left_[*best] > 0) {
                --failures_left_[*best];
                fail = true;
            } else {
                reply = rules_[*best].response;
            }
        } else if (fallback_) {
            fallback = fallback_;
        } else {
            throw BackendError(BackendErrorKind::non_retryable,
                               "mock backend: no rule matches request tagged '" + request.tag + "'");
        }
    }
    if (fail) throw BackendError(BackendErrorKind::timeout, "mock backend: scripted timeout");
    if (fallback) reply = fallback(request);
    if (delay_ > Clock::duration::zero()) clock().sleep_for(delay_);

    GenerationResult result;
    result.text = std::move(reply);
    result.prompt_tokens = prompt.size() / 4;
    result.completion_tokens = result.text.size() / 4;
    return result;
}

std::vector<std::vector<double>> MockBackend::do_embed(std::span<const std::string> texts) {
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
        const auto v = hashing_embedder(text, embedding_dim_);
        out.emplace_back(v.values().begin(), v.values().end());
    }
    return out;
}

} // namespace toolweaver
