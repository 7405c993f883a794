#pragma once

#include "toolweaver/clock.hpp"
#include "toolweaver/embedding.hpp"
#include "toolweaver/errors.hpp"
#include "toolweaver/rate_limiter.hpp"

#include <atomic>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace toolweaver {

enum class Role { system, user, assistant, tool };

std::string_view to_string(Role role);
std::optional<Role> parse_role(std::string_view text);

struct ChatMessage {
    Role role = Role::user;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

/// Request tags name the purpose of a call; the prefix decides default temperature
/// ("judge." → 0.0, "simulate" → 0.3, everything else → 0.8).
namespace tags {
inline constexpr const char* taxonomy_field = "gen.taxonomy.field";
inline constexpr const char* taxonomy_subfield = "gen.taxonomy.subfield";
inline constexpr const char* tools_generate = "gen.tools";
inline constexpr const char* tools_complete = "gen.tools.complete";
inline constexpr const char* single_generate = "gen.single";
inline constexpr const char* multi_turn = "gen.multi.turn";
inline constexpr const char* multi_final = "gen.multi.final";
inline constexpr const char* error_invalid_value = "gen.error.invalid_value";
inline constexpr const char* error_message = "gen.error.message";
inline constexpr const char* judge_logic = "judge.logic";
inline constexpr const char* judge_sem = "judge.sem";
inline constexpr const char* judge_coherence = "judge.coherence";
inline constexpr const char* judge_exist = "judge.exist";
inline constexpr const char* judge_quality = "judge.quality";
inline constexpr const char* eval_logic = "judge.eval.logic";
inline constexpr const char* eval_sem = "judge.eval.sem";
inline constexpr const char* eval_cons = "judge.eval.cons";
inline constexpr const char* eval_det = "judge.eval.det";
inline constexpr const char* eval_help = "judge.eval.help";
inline constexpr const char* simulate = "simulate";
} // namespace tags

double default_temperature(std::string_view tag);

struct GenerationRequest {
    std::vector<ChatMessage> messages;
    double temperature = 0.8;
    int max_tokens = 1024;
    std::vector<std::string> stop;
    std::string tag;

    /// System + user pair with the tag's default temperature.
    static GenerationRequest make(std::string tag, std::string system, std::string user);

    /// Content of the last user message, or empty.
    std::string_view last_user_content() const;
};

struct GenerationResult {
    std::string text;
    std::size_t prompt_tokens = 0;
    std::size_t completion_tokens = 0;
    double latency = 0.0; ///< seconds, including retries and admission waits
    std::size_t retries = 0;
};

struct BackendConfig {
    std::string base_url = "http://127.0.0.1:8000/v1";
    std::string model_name = "gpt-4o-mini";
    std::string embedding_model = "text-embedding-3-small";
    std::string credential; ///< filled from TOOLWEAVER_API_KEY only
    double timeout = 60.0;
    std::size_t max_retries = 3;
    double backoff_base = 0.5;
    std::size_t rate_limit = 0; ///< requests per minute; 0 = unlimited
    std::size_t max_concurrency = 8;
    std::size_t embed_batch = 64;

    /// Throws ValidationError when timeout <= 0 or max_concurrency == 0.
    void validate() const;
};

inline constexpr const char* kApiKeyEnv = "TOOLWEAVER_API_KEY";

/// Reads the credential from the environment; empty when unset.
std::string credential_from_env();

/// Text generation and embedding provider. generate()/embed() check preconditions, bound
/// concurrency, apply rate limiting and retry transient failures with exponential backoff;
/// subclasses supply the single-attempt transport.
class Backend : public Embedder {
public:
    explicit Backend(BackendConfig config, Clock& clock = steady_clock());
    ~Backend() override = default;

    GenerationResult generate(const GenerationRequest& request);
    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;

    const BackendConfig& config() const noexcept { return config_; }

    /// Successful + failed single attempts issued to the transport.
    std::size_t attempts() const noexcept { return attempts_.load(); }
    std::size_t total_retries() const noexcept { return retries_.load(); }

protected:
    /// One attempt. Throw BackendError with kind timeout/transient to request a retry.
    virtual GenerationResult do_generate(const GenerationRequest& request) = 0;
    virtual std::vector<std::vector<double>> do_embed(std::span<const std::string> texts) = 0;

    Clock& clock() noexcept { return clock_; }

private:
    template <typename Fn>
    auto with_retries(Fn&& attempt);


    BackendConfig config_;
    Clock& clock_;
    RateLimiter limiter_;
    std::mutex slots_mutex_;
    std::condition_variable slots_cv_;
    std::size_t in_flight_ = 0;
    std::atomic<std::size_t> attempts_{0};
    std::atomic<std::size_t> retries_{0};
};

/// Chat-completion style HTTP provider: POST {base_url}/chat/completions and
/// POST {base_url}/embeddings.
class HttpBackend final : public Backend {
public:
    explicit HttpBackend(BackendConfig config, Clock& clock = steady_clock());

    /// Lightweight GET {base_url}/models probe; false on any failure.
    bool health_check();

protected:
    GenerationResult do_generate(const GenerationRequest& request) override;
    std::vector<std::vector<double>> do_embed(std::span<const std::string> texts) override;

private:
    struct Endpoint {
        std::string scheme_host_port;
        std::string path_prefix;
    };
    Endpoint endpoint_;
};

} // namespace toolweaver
