#pragma once

#include "toolweaver/backend.hpp"
#include "toolweaver/json_util.hpp"
#include "toolweaver/tool_spec.hpp"

#include <optional>
#include <string>
#include <vector>

namespace toolweaver {

/// Arguments of one tool invocation. `arguments` is always a JSON object, so it serializes
/// with sorted keys.
struct ToolCallInput {
    std::string tool_id;
    Json arguments = Json::object();

    bool operator==(const ToolCallInput&) const = default;
};

/// A tool's reply: a structured record keyed by response field, or a free-text body.
struct ToolOutput {
    enum class Kind { structured, text };

    Kind kind = Kind::structured;
    Json payload = Json::object(); ///< structured: object; text: string

    static ToolOutput structured(Json object);
    static ToolOutput text(std::string body);

    /// Parses `value` as stored in sample records: objects are structured, strings are text.
    static ToolOutput from_json(const Json& value);
    const Json& to_json() const noexcept { return payload; }

    bool operator==(const ToolOutput&) const = default;
};

enum class CheckStatus { pass, fail, skipped, unevaluated };

std::string_view to_string(CheckStatus status);

/// Outcome of one validation level.
struct CheckResult {
    CheckStatus status = CheckStatus::skipped;
    std::string reason;

    static CheckResult pass() { return {CheckStatus::pass, {}}; }
    static CheckResult fail(std::string reason) { return {CheckStatus::fail, std::move(reason)}; }
    static CheckResult skipped() { return {CheckStatus::skipped, {}}; }
    static CheckResult unevaluated(std::string reason) {
        return {CheckStatus::unevaluated, std::move(reason)};
    }

    bool passed() const noexcept { return status == CheckStatus::pass; }

    bool operator==(const CheckResult&) const = default;
};

Json to_json(const CheckResult& check);
CheckResult check_from_json(const Json& value);

/// Format / logic / semantic verdicts of the three-level cascade.
struct ValidationVerdict {
    CheckResult format;
    CheckResult logic;
    CheckResult sem;

    bool passed() const noexcept { return format.passed() && logic.passed() && sem.passed(); }

    bool operator==(const ValidationVerdict&) const = default;
};

Json to_json(const ValidationVerdict& verdict);
ValidationVerdict verdict_from_json(const Json& value);

// ---------------------------------------------------------------------------------------------
// Deterministic format checking
// ---------------------------------------------------------------------------------------------

enum class FormatIssueKind {
    not_an_object,          ///< arguments are not a JSON object
    unknown_parameter,      ///< clause (a)
    missing_required,       ///< clause (b)
    type_mismatch,          ///< clause (c)
    output_not_structured,  ///< clause (d): schema declares fields but output is text
    missing_response_field, ///< clause (d)
    response_type_mismatch, ///< clause (d)
    unexpected_response_field,
};

struct FormatIssue {
    FormatIssueKind kind;
    std::string name;     ///< offending parameter or response field
    std::string expected; ///< declared type tag, for mismatches
    std::string actual;   ///< observed JSON kind, for mismatches

    /// Human-readable reason, e.g. "missing required parameter 'city'".
    std::string message() const;
};

/// Input clauses (a)-(c): unknown parameters, then missing required ones (in `required`
/// order), then type mismatches, each group in key order.
std::vector<FormatIssue> check_arguments(const ToolSpec& tool, const Json& arguments);

/// Output clause (d). Text outputs are accepted only when the response schema is empty.
std::vector<FormatIssue> check_output(const ToolSpec& tool, const ToolOutput& output);

/// Arguments issues followed by output issues.
std::vector<FormatIssue> format_issues(const ToolSpec& tool, const ToolCallInput& input,
                                       const ToolOutput& output);

/// Pure, deterministic V_format. The failure reason is the first issue's message.
CheckResult validate_format(const ToolSpec& tool, const ToolCallInput& input,
                            const ToolOutput& output);

/// Builds a minimal valid argument object straight from the tool spec (required params only,
/// placeholder values of the declared types).
Json placeholder_arguments(const ToolSpec& tool, bool include_optional = false);

/// Placeholder value of the given type.
Json placeholder_value(TypeTag tag, std::string_view name);

/// Structured output covering every response field with placeholder values.
ToolOutput placeholder_output(const ToolSpec& tool);

// ---------------------------------------------------------------------------------------------
// Judge protocol
// ---------------------------------------------------------------------------------------------

/// Parses a judge completion that must begin with PASS or FAIL (case-insensitive, optional
/// markdown emphasis); text after the token (minus ':' or '-') is the reason.
std::optional<CheckResult> parse_judge_verdict(std::string_view completion);

/// Issues `request`; on unparseable output re-asks once with a reminder of the protocol,
/// then yields fail("judge unparseable"). BackendError propagates.
CheckResult ask_judge(Backend& backend, GenerationRequest request);

} // namespace toolweaver
