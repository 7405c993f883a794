#include "toolweaver/backend.hpp"

#include "toolweaver/json_util.hpp"

#include <httplib.h>

#include <cmath>
#include <cstdlib>

namespace toolweaver {

std::string_view to_string(Role role) {
    switch (role) {
    case Role::system:
        return "system";
    case Role::user:
        return "user";
    case Role::assistant:
        return "assistant";
    case Role::tool:
        return "tool";
    }
    return "user";
}

std::optional<Role> parse_role(std::string_view text) {
    for (Role role : {Role::system, Role::user, Role::assistant, Role::tool}) {
        if (text == to_string(role)) return role;
    }
    return std::nullopt;
}

double default_temperature(std::string_view tag) {
    if (tag.starts_with("judge")) return 0.0;
    if (tag.starts_with("simulate")) return 0.3;
    return 0.8;
}

GenerationRequest GenerationRequest::make(std::string tag, std::string system, std::string user) {
    GenerationRequest request;
    request.temperature = default_temperature(tag);
    request.tag = std::move(tag);
    if (!system.empty()) request.messages.push_back({Role::system, std::move(system)});
    request.messages.push_back({Role::user, std::move(user)});
    return request;
}

std::string_view GenerationRequest::last_user_content() const {
    for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
        if (it->role == Role::user) return it->content;
    }
    return {};
}

void BackendConfig::validate() const {
    if (!(timeout > 0.0)) throw ValidationError("backend timeout must be > 0");
    if (backoff_base < 0.0) throw ValidationError("backend backoff_base must be >= 0");
    if (max_concurrency == 0) throw ValidationError("backend max_concurrency must be >= 1");
    if (embed_batch == 0) throw ValidationError("backend embed_batch must be >= 1");
}

std::string credential_from_env() {
    const char* value = std::getenv(kApiKeyEnv);
    return value ? std::string(value) : std::string();
}

// ---------------------------------------------------------------------------------------------

RateLimiter::RateLimiter(std::size_t per_minute, Clock& clock)
    : per_minute_(per_minute), clock_(clock) {}

Clock::time_point RateLimiter::acquire() {
    if (per_minute_ == 0) return clock_.now();
    constexpr auto window = std::chrono::seconds(60);
    std::unique_lock lock(mutex_);
    for (;;) {
        const auto now = clock_.now();
        while (!admitted_.empty() && admitted_.front() + window <= now) admitted_.pop_front();
        if (admitted_.size() < per_minute_) {
            admitted_.push_back(now);
            return now;
        }
        const auto wake = admitted_.front() + window;
        lock.unlock();
        clock_.sleep_until(wake);
        lock.lock();
    }
}

// ---------------------------------------------------------------------------------------------

Backend::Backend(BackendConfig config, Clock& clock)
    : config_(std::move(config)), clock_(clock), limiter_(config_.rate_limit, clock) {
    config_.validate();
}

template <typename Fn>
auto Backend::with_retries(Fn&& attempt) {
    {
        std::unique_lock lock(slots_mutex_);
        slots_cv_.wait(lock, [&] { return in_flight_ < config_.max_concurrency; });
        ++in_flight_;
    }
    struct Release {
        Backend& self;
        ~Release() {
            {
                std::lock_guard lock(self.slots_mutex_);
                --self.in_flight_;
            }
            self.slots_cv_.notify_one();
        }
    } release{*this};

    for (std::size_t retry = 0;; ++retry) {
        limiter_.acquire();
        try {
            ++attempts_;
            return attempt(retry);
        } catch (const BackendError& e) {
            if (!e.retryable()) throw;
            if (retry >= config_.max_retries) {
                if (config_.max_retries == 0) throw;
                throw BackendError(BackendErrorKind::retries_exhausted, e.kind(),
                                   "retry budget exhausted after " +
                                       std::to_string(config_.max_retries) +
                                       " retries: " + e.what());
            }
        }
        ++retries_;
        clock_.sleep_for(from_seconds(config_.backoff_base * std::ldexp(1.0, static_cast<int>(retry))));
    }
}

GenerationResult Backend::generate(const GenerationRequest& request) {
    if (request.messages.empty()) throw PreconditionError("generation request has no messages");
    if (!(request.temperature >= 0.0 && request.temperature <= 2.0)) {
        throw PreconditionError("temperature must be within [0, 2]");
    }
    for (const auto& m : request.messages) {
        if (m.content.empty() && m.role != Role::assistant) {
            throw PreconditionError("only assistant messages may be empty");
        }
    }
    const auto start = clock_.now();
    GenerationResult result = with_retries([&](std::size_t retry) {
        GenerationResult r = do_generate(request);
        r.retries = retry;
        return r;
    });
    result.latency = to_seconds(clock_.now() - start);
    return result;
}

std::vector<EmbeddingVector> Backend::embed(std::span<const std::string> texts) {
    if (texts.empty()) throw PreconditionError("embed needs at least one text");
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    std::size_t dim = 0;
    for (std::size_t begin = 0; begin < texts.size(); begin += config_.embed_batch) {
        const auto batch = texts.subspan(begin, std::min(config_.embed_batch, texts.size() - begin));
        auto raw = with_retries([&](std::size_t) { return do_embed(batch); });
        if (raw.size() != batch.size()) {
            throw BackendError(BackendErrorKind::non_retryable,
                               "embedding count mismatch: asked " + std::to_string(batch.size()) +
                                   ", got " + std::to_string(raw.size()));
        }
        for (auto& values : raw) {
            if (dim == 0) dim = values.size();
            if (values.size() != dim) {
                throw BackendError(BackendErrorKind::non_retryable,
                                   "embedding dimension mismatch within a batch");
            }
            try {
                out.emplace_back(std::move(values));
            } catch (const PreconditionError& e) {
                throw BackendError(BackendErrorKind::non_retryable, e.what());
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------------------------

namespace {

BackendError classify_transport(const httplib::Result& res, std::string_view what) {
    const auto err = res.error();
    const std::string message = std::string(what) + ": " + httplib::to_string(err);
    if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
        err == httplib::Error::Write) {
        return BackendError(BackendErrorKind::timeout, message);
    }
    return BackendError(BackendErrorKind::transient, message);
}

BackendError classify_status(int status, std::string_view what, std::string_view body) {
    std::string message = std::string(what) + ": HTTP " + std::to_string(status);
    if (!body.empty()) message += " " + std::string(body.substr(0, 200));
    if (status == 408) return BackendError(BackendErrorKind::timeout, message);
    if (status == 429 || status >= 500) return BackendError(BackendErrorKind::transient, message);
    return BackendError(BackendErrorKind::non_retryable, message);
}

httplib::Client make_client(const std::string& origin, double timeout) {
    httplib::Client client(origin);
    const auto secs = static_cast<time_t>(timeout);
    const auto usecs = static_cast<time_t>((timeout - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    return client;
}

} // namespace

HttpBackend::HttpBackend(BackendConfig config, Clock& clock) : Backend(std::move(config), clock) {
    const std::string& url = this->config().base_url;
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ValidationError("base_url must include a scheme: " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    endpoint_.scheme_host_port = url.substr(0, path_start);
    endpoint_.path_prefix = path_start == std::string::npos ? "" : url.substr(path_start);
    while (!endpoint_.path_prefix.empty() && endpoint_.path_prefix.back() == '/') {
        endpoint_.path_prefix.pop_back();
    }
}

bool HttpBackend::health_check() {
    try {
        auto client = make_client(endpoint_.scheme_host_port, std::min(config().timeout, 5.0));
        httplib::Headers headers;
        if (!config().credential.empty()) {
            headers.emplace("Authorization", "Bearer " + config().credential);
        }
        const auto res = client.Get(endpoint_.path_prefix + "/models", headers);
        return res && res->status >= 200 && res->status < 300;
    } catch (...) {
        return false;
    }
}

GenerationResult HttpBackend::do_generate(const GenerationRequest& request) {
    Json messages = Json::array();
    for (const auto& m : request.messages) {
        messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    }
    Json body = {{"model", config().model_name},
                 {"messages", std::move(messages)},
                 {"temperature", request.temperature},
                 {"max_tokens", request.max_tokens}};
    if (!request.stop.empty()) body["stop"] = request.stop;

    auto client = make_client(endpoint_.scheme_host_port, config().timeout);
    httplib::Headers headers;
    if (!config().credential.empty()) {
        headers.emplace("Authorization", "Bearer " + config().credential);
    }
    const auto res = client.Post(endpoint_.path_prefix + "/chat/completions", headers,
                                 body.dump(), "application/json");
    if (!res) throw classify_transport(res, "chat completion");
    if (res->status < 200 || res->status >= 300) {
        throw classify_status(res->status, "chat completion", res->body);
    }

    const Json reply = Json::parse(res->body, nullptr, false);
    GenerationResult result;
    try {
        result.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const Json::exception&) {
        throw BackendError(BackendErrorKind::non_retryable,
                           "chat completion response lacks choices[0].message.content");
    }
    if (const auto usage = reply.find("usage"); usage != reply.end() && usage->is_object()) {
        result.prompt_tokens = usage->value("prompt_tokens", std::size_t{0});
        result.completion_tokens = usage->value("completion_tokens", std::size_t{0});
    }
    return result;
}

std::vector<std::vector<double>> HttpBackend::do_embed(std::span<const std::string> texts) {
    const Json body = {{"model", config().embedding_model},
                       {"input", std::vector<std::string>(texts.begin(), texts.end())}};
    auto client = make_client(endpoint_.scheme_host_port, config().timeout);
    httplib::Headers headers;
    if (!config().credential.empty()) {
        headers.emplace("Authorization", "Bearer " + config().credential);
    }
    const auto res =
        client.Post(endpoint_.path_prefix + "/embeddings", headers, body.dump(), "application/json");
    if (!res) throw classify_transport(res, "embeddings");
    if (res->status < 200 || res->status >= 300) {
        throw classify_status(res->status, "embeddings", res->body);
    }
    const Json reply = Json::parse(res->body, nullptr, false);
    std::vector<std::vector<double>> out;
    try {
        for (const auto& item : reply.at("data")) {
            out.push_back(item.at("embedding").get<std::vector<double>>());
        }
    } catch (const Json::exception&) {
        throw BackendError(BackendErrorKind::non_retryable,
                           "embeddings response lacks data[i].embedding");
    }
    return out;
}

} // namespace toolweaver
