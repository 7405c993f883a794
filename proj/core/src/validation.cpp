#include "toolweaver/validation.hpp"

#include "toolweaver/errors.hpp"

#include <cctype>
#include <set>

namespace toolweaver {

ToolOutput ToolOutput::structured(Json object) {
    ToolOutput out;
    out.kind = Kind::structured;
    out.payload = std::move(object);
    return out;
}

ToolOutput ToolOutput::text(std::string body) {
    ToolOutput out;
    out.kind = Kind::text;
    out.payload = std::move(body);
    return out;
}

ToolOutput ToolOutput::from_json(const Json& value) {
    if (value.is_object()) return structured(value);
    if (value.is_string()) return text(value.get<std::string>());
    throw ParseError("tool output must be an object or a string, got " + std::string(json_kind(value)));
}

std::string_view to_string(CheckStatus status) {
    switch (status) {
    case CheckStatus::pass:
        return "pass";
    case CheckStatus::fail:
        return "fail";
    case CheckStatus::skipped:
        return "skipped";
    case CheckStatus::unevaluated:
        return "unevaluated";
    }
    return "skipped";
}

Json to_json(const CheckResult& check) {
    Json out = {{"status", to_string(check.status)}};
    if (!check.reason.empty()) out["reason"] = check.reason;
    return out;
}

CheckResult check_from_json(const Json& value) {
    if (!value.is_object() || !value.contains("status")) {
        throw ParseError("check result must be an object with 'status'");
    }
    const auto status = value.at("status").get<std::string>();
    CheckResult out;
    if (status == "pass") {
        out.status = CheckStatus::pass;
    } else if (status == "fail") {
        out.status = CheckStatus::fail;
    } else if (status == "skipped") {
        out.status = CheckStatus::skipped;
    } else if (status == "unevaluated") {
        out.status = CheckStatus::unevaluated;
    } else {
        throw ParseError("unknown check status '" + status + "'");
    }
    out.reason = value.value("reason", std::string());
    return out;
}

Json to_json(const ValidationVerdict& verdict) {
    return {{"format", to_json(verdict.format)},
            {"logic", to_json(verdict.logic)},
            {"sem", to_json(verdict.sem)}};
}

ValidationVerdict verdict_from_json(const Json& value) {
    return {check_from_json(value.at("format")), check_from_json(value.at("logic")),
            check_from_json(value.at("sem"))};
}

std::string FormatIssue::message() const {
    switch (kind) {
    case FormatIssueKind::not_an_object:
        return "arguments must be an object, got " + actual;
    case FormatIssueKind::unknown_parameter:
        return "unknown parameter '" + name + "'";
    case FormatIssueKind::missing_required:
        return "missing required parameter '" + name + "'";
    case FormatIssueKind::type_mismatch:
        return "parameter '" + name + "' expected " + expected + ", got " + actual;
    case FormatIssueKind::output_not_structured:
        return "expected a structured output record, got " + actual;
    case FormatIssueKind::missing_response_field:
        return "missing response field '" + name + "'";
    case FormatIssueKind::response_type_mismatch:
        return "response field '" + name + "' expected " + expected + ", got " + actual;
    case FormatIssueKind::unexpected_response_field:
        return "unexpected response field '" + name + "'";
    }
    return "format issue";
}

std::vector<FormatIssue> check_arguments(const ToolSpec& tool, const Json& arguments) {
    std::vector<FormatIssue> issues;
    if (!arguments.is_object()) {
        issues.push_back({FormatIssueKind::not_an_object, {}, "object", std::string(json_kind(arguments))});
        return issues;
    }
    for (const auto& [key, _] : arguments.items()) {
        if (!tool.parameters.contains(key)) {
            issues.push_back({FormatIssueKind::unknown_parameter, key, {}, {}});
        }
    }
    std::set<std::string_view> reported;
    for (const auto& name : tool.required) {
        if (!arguments.contains(name) && reported.insert(name).second) {
            issues.push_back({FormatIssueKind::missing_required, name, {}, {}});
        }
    }
    for (const auto& [key, value] : arguments.items()) {
        const auto it = tool.parameters.find(key);
        if (it == tool.parameters.end()) continue;
        if (!type_matches(it->second.type, value)) {
            issues.push_back({FormatIssueKind::type_mismatch, key, std::string(to_string(it->second.type)),
                              std::string(json_kind(value))});
        }
    }
    return issues;
}

std::vector<FormatIssue> check_output(const ToolSpec& tool, const ToolOutput& output) {
    std::vector<FormatIssue> issues;
    if (output.kind == ToolOutput::Kind::text || !output.payload.is_object()) {
        if (!tool.responses.empty()) {
            issues.push_back({FormatIssueKind::output_not_structured, {}, "object",
                              output.kind == ToolOutput::Kind::text
                                  ? std::string("text")
                                  : std::string(json_kind(output.payload))});
        }
        return issues;
    }
    for (const auto& [name, spec] : tool.responses) {
        const auto it = output.payload.find(name);
        if (it == output.payload.end()) {
            issues.push_back({FormatIssueKind::missing_response_field, name, {}, {}});
        } else if (!type_matches(spec.type, *it)) {
            issues.push_back({FormatIssueKind::response_type_mismatch, name,
                              std::string(to_string(spec.type)), std::string(json_kind(*it))});
        }
    }
    for (const auto& [key, _] : output.payload.items()) {
        if (!tool.responses.contains(key)) {
            issues.push_back({FormatIssueKind::unexpected_response_field, key, {}, {}});
        }
    }
    return issues;
}

std::vector<FormatIssue> format_issues(const ToolSpec& tool, const ToolCallInput& input,
                                       const ToolOutput& output) {
    auto issues = check_arguments(tool, input.arguments);
    auto out = check_output(tool, output);
    issues.insert(issues.end(), out.begin(), out.end());
    return issues;
}

CheckResult validate_format(const ToolSpec& tool, const ToolCallInput& input,
                            const ToolOutput& output) {
    const auto issues = format_issues(tool, input, output);
    return issues.empty() ? CheckResult::pass() : CheckResult::fail(issues.front().message());
}

Json placeholder_value(TypeTag tag, std::string_view name) {
    switch (tag) {
    case TypeTag::string:
        return "sample_" + std::string(name);
    case TypeTag::integer:
        return 1;
    case TypeTag::number:
        return 1.5;
    case TypeTag::boolean:
        return true;
    case TypeTag::array:
        return Json::array({"item"});
    case TypeTag::object:
        return Json{{"key", "value"}};
    }
    return nullptr;
}

Json placeholder_arguments(const ToolSpec& tool, bool include_optional) {
    Json args = Json::object();
    for (const auto& [name, spec] : tool.parameters) {
        const bool required =
            std::find(tool.required.begin(), tool.required.end(), name) != tool.required.end();
        if (required || include_optional) args[name] = placeholder_value(spec.type, name);
    }
    return args;
}

ToolOutput placeholder_output(const ToolSpec& tool) {
    Json payload = Json::object();
    for (const auto& [name, spec] : tool.responses) payload[name] = placeholder_value(spec.type, name);
    return ToolOutput::structured(std::move(payload));
}

std::optional<CheckResult> parse_judge_verdict(std::string_view completion) {
    std::size_t i = 0;
    while (i < completion.size() &&
           (std::isspace(static_cast<unsigned char>(completion[i])) || completion[i] == '*' ||
            completion[i] == '`' || completion[i] == '#' || completion[i] == '"' ||
            completion[i] == '\'')) {
        ++i;
    }
    std::size_t j = i;
    while (j < completion.size() && std::isalpha(static_cast<unsigned char>(completion[j]))) ++j;
    const std::string token = to_lower_ascii(completion.substr(i, j - i));
    if (token != "pass" && token != "fail") return std::nullopt;

    std::string rest = trim(completion.substr(j));
    while (!rest.empty() && (rest.front() == '*' || rest.front() == ':' || rest.front() == '-' ||
                             rest.front() == '"')) {
        rest = trim(std::string_view(rest).substr(1));
    }
    if (token == "pass") return CheckResult::pass();
    return CheckResult::fail(rest.empty() ? "judge reported failure" : rest);
}

CheckResult ask_judge(Backend& backend, GenerationRequest request) {
    const auto first = backend.generate(request);
    if (auto verdict = parse_judge_verdict(first.text)) return *verdict;
    request.messages.push_back({Role::assistant, first.text});
    request.messages.push_back(
        {Role::user, "Your answer could not be parsed. Reply with PASS, or FAIL: <reason>."});
    const auto second = backend.generate(request);
    if (auto verdict = parse_judge_verdict(second.text)) return *verdict;
    return CheckResult::fail("judge unparseable");
}

} // namespace toolweaver
