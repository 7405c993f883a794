#pragma once

#include "toolweaver/backend.hpp"
#include "toolweaver/carg_single.hpp"
#include "toolweaver/prompts.hpp"
#include "toolweaver/rng.hpp"
#include "toolweaver/tool_spec.hpp"
#include "toolweaver/validation.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace toolweaver {

enum class ErrorKind { type_error, missing_required, excess_param, invalid_value };

inline constexpr std::array<ErrorKind, 4> kAllErrorKinds{
    ErrorKind::type_error, ErrorKind::missing_required, ErrorKind::excess_param,
    ErrorKind::invalid_value};

std::string_view to_string(ErrorKind kind);
std::optional<ErrorKind> parse_error_kind(std::string_view text);

/// True for the kinds a deterministic format check detects.
bool is_structural(ErrorKind kind);

/// Format-issue class each structural kind must trigger.
FormatIssueKind expected_issue(ErrorKind kind);

/// Replaces one uniformly chosen argument with a value of a different type:
/// string→42, integer→"forty-two", boolean→"yes", number→true, array/object→"oops".
Json inject_type_error(const ToolSpec& tool, const Json& valid_arguments, Rng& rng);

/// Drops one uniformly chosen required parameter. InapplicableError if `required` is empty.
Json inject_missing_required(const ToolSpec& tool, const Json& valid_arguments, Rng& rng);

/// Adds "extra_field" (or "extra_field_2", "_3", ... on collision) with value "x".
Json inject_excess_param(const ToolSpec& tool, const Json& valid_arguments, Rng& rng);

/// Asks the backend for a same-type but semantically invalid value for one uniformly chosen
/// string/integer/number argument. Wrong-typed replies are re-asked once, then
/// GenerationError. InapplicableError when no such argument is present.
Json inject_invalid_value(const ToolSpec& tool, const Json& valid_arguments, Backend& backend,
                          Rng& rng, const PromptTemplates& prompts = PromptTemplates::defaults());

/// Deterministic message for a structural issue, e.g. "Error: missing required parameter 'city'".
std::string template_error_message(const FormatIssue& issue);

struct ErrorMessageOptions {
    bool use_backend = true;    ///< false: structural kinds always use the template
    bool allow_fallback = true; ///< structural kinds fall back to the template on backend failure
};

/// e_msg for a corruption of `kind`. Precondition: `corrupted` differs from `valid` and, for
/// structural kinds, check_arguments reports an issue of the matching class.
std::string generate_error_message(const ToolSpec& tool, ErrorKind kind, const Json& valid,
                                   const Json& corrupted, Backend* backend,
                                   const ErrorMessageOptions& options = {},
                                   const PromptTemplates& prompts = PromptTemplates::defaults());

struct ErrorVerdict {
    CheckResult format;
    CheckResult exist;
    CheckResult quality;

    bool passed() const noexcept { return format.passed() && exist.passed() && quality.passed(); }

    bool operator==(const ErrorVerdict&) const = default;
};

struct ErrorSample {
    std::string sample_id; ///< "<tool_id>-e<index>"
    std::string tool_id;
    ToolCallInput valid_input;
    ToolCallInput corrupted_input;
    ErrorKind kind = ErrorKind::type_error;
    std::string message;
    ErrorVerdict verdict;

    bool operator==(const ErrorSample&) const = default;
};

/// Sample-sink record: {sample_id, tool_id, scenario:"error", kind, valid_input,
/// corrupted_input, message, verdict}.
Json to_json(const ErrorSample& sample);
ErrorSample error_sample_from_json(const Json& record);

/// Deterministic V_format: structural kinds must be rejected by check_arguments with the
/// matching issue class; invalid_value must pass it.
CheckResult error_format_check(const ToolSpec& tool, ErrorKind kind, const Json& corrupted);

/// V_err = V_format ∧ V_exist ∧ V_quality; judges are skipped once a level fails.
ErrorVerdict validate_error_sample(const ErrorSample& sample, const ToolSpec& tool,
                                   Backend& backend,
                                   const PromptTemplates& prompts = PromptTemplates::defaults());

/// Kinds applicable to `tool` given one of its valid argument objects, in canonical order.
std::vector<ErrorKind> applicable_kinds(const ToolSpec& tool, const Json& valid_arguments);

struct ErrorGenerationOptions {
    std::size_t per_tool = 4;
    std::uint64_t rng_seed = 0;
    ErrorMessageOptions messages;
};

struct ErrorGenerationReport {
    std::size_t attempted = 0;
    std::size_t inapplicable = 0;
    std::size_t generator_errors = 0;
    std::size_t validation_failures = 0;
    std::size_t unevaluated = 0;
    std::size_t accepted = 0;
};

struct ErrorCorpus {
    std::vector<ErrorSample> samples; ///< ordered by (tool_id, sample index)
    ErrorGenerationReport report;
};

/// For each tool, cycles through its valid inputs (taken from accepted single-turn samples)
/// and round-robins over applicable kinds, keeping samples that pass validate_error_sample.
ErrorCorpus run_error_generation(const std::vector<ToolSpec>& tools,
                                 const std::vector<SingleTurnSample>& valid_samples,
                                 Backend& backend, const ErrorGenerationOptions& options,
                                 std::size_t workers,
                                 const PromptTemplates& prompts = PromptTemplates::defaults());

} // namespace toolweaver
