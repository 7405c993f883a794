#include "toolweaver/carg_error.hpp"

#include "toolweaver/errors.hpp"
#include "toolweaver/parallel.hpp"

#include <algorithm>
#include <map>

namespace toolweaver {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::type_error: return "type_error";
    case ErrorKind::missing_required: return "missing_required";
    case ErrorKind::excess_param: return "excess_param";
    case ErrorKind::invalid_value: return "invalid_value";
    }
    return "unknown";
}

std::optional<ErrorKind> parse_error_kind(std::string_view text) {
    for (ErrorKind k : kAllErrorKinds) {
        if (to_string(k) == text) return k;
    }
    return std::nullopt;
}

bool is_structural(ErrorKind kind) { return kind != ErrorKind::invalid_value; }

FormatIssueKind expected_issue(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::type_error: return FormatIssueKind::type_mismatch;
    case ErrorKind::missing_required: return FormatIssueKind::missing_required;
    case ErrorKind::excess_param: return FormatIssueKind::unknown_parameter;
    case ErrorKind::invalid_value: break;
    }
    throw PreconditionError("invalid_value has no format issue class");
}

namespace {

std::string_view issue_name(FormatIssueKind kind) {
    switch (kind) {
    case FormatIssueKind::not_an_object: return "not_an_object";
    case FormatIssueKind::unknown_parameter: return "unknown_parameter";
    case FormatIssueKind::missing_required: return "missing_required";
    case FormatIssueKind::type_mismatch: return "type_mismatch";
    case FormatIssueKind::output_not_structured: return "output_not_structured";
    case FormatIssueKind::missing_response_field: return "missing_response_field";
    case FormatIssueKind::response_type_mismatch: return "response_type_mismatch";
    case FormatIssueKind::unexpected_response_field: return "unexpected_response_field";
    }
    return "unknown";
}

void require_valid(const ToolSpec& tool, const Json& args) {
    const auto issues = check_arguments(tool, args);
    if (!issues.empty()) throw PreconditionError("valid input expected: " + issues.front().message());
}

Json wrong_type_value(TypeTag tag) {
    switch (tag) {
    case TypeTag::string: return 42;
    case TypeTag::integer: return "forty-two";
    case TypeTag::boolean: return "yes";
    case TypeTag::number: return true;
    case TypeTag::array:
    case TypeTag::object: return "oops";
    }
    return nullptr;
}

bool invalid_value_slot(TypeTag tag) {
    return tag == TypeTag::string || tag == TypeTag::integer || tag == TypeTag::number;
}

// Declared argument names present in `args`, in key order.
std::vector<std::string> present_params(const ToolSpec& tool, const Json& args) {
    std::vector<std::string> out;
    for (const auto& [key, _] : args.items()) {
        if (tool.parameters.count(key)) out.push_back(key);
    }
    return out;
}

} // namespace

Json inject_type_error(const ToolSpec& tool, const Json& valid_arguments, Rng& rng) {
    require_valid(tool, valid_arguments);
    const auto names = present_params(tool, valid_arguments);
    if (names.empty()) throw InapplicableError("no parameter to corrupt");
    const auto& name = names[rng.uniform_index(names.size())];
    Json out = valid_arguments;
    out[name] = wrong_type_value(tool.parameters.at(name).type);
    return out;
}

Json inject_missing_required(const ToolSpec& tool, const Json& valid_arguments, Rng& rng) {
    require_valid(tool, valid_arguments);
    if (tool.required.empty()) throw InapplicableError("tool has no required parameters");
    const auto& name = tool.required[rng.uniform_index(tool.required.size())];
    Json out = valid_arguments;
    out.erase(name);
    return out;
}

Json inject_excess_param(const ToolSpec& tool, const Json& valid_arguments, Rng&) {
    require_valid(tool, valid_arguments);
    std::string name = "extra_field";
    for (std::size_t n = 2; tool.parameters.count(name) || valid_arguments.contains(name); ++n) {
        name = "extra_field_" + std::to_string(n);
    }
    Json out = valid_arguments;
    out[name] = "x";
    return out;
}

Json inject_invalid_value(const ToolSpec& tool, const Json& valid_arguments, Backend& backend, Rng& rng,
                          const PromptTemplates& prompts) {
    require_valid(tool, valid_arguments);
    std::vector<std::string> slots;
    for (const auto& name : present_params(tool, valid_arguments)) {
        if (invalid_value_slot(tool.parameters.at(name).type)) slots.push_back(name);
    }
    if (slots.empty()) throw InapplicableError("no string or numeric parameter to corrupt");
    const auto& name = slots[rng.uniform_index(slots.size())];
    const ParamSpec& param = tool.parameters.at(name);
    const auto request = prompts.request("error_invalid_value", tags::error_invalid_value,
                                         {{"tool_spec", to_json(tool).dump(2)},
                                          {"parameter", name},
                                          {"type", std::string(to_string(param.type))},
                                          {"description", param.description},
                                          {"value", valid_arguments[name].dump()}});
    for (int attempt = 0; attempt < 2; ++attempt) {
        const auto reply = backend.generate(request);
        const auto parsed = extract_first_record(reply.text);
        if (!parsed || !parsed->contains("value")) continue;
        const Json& value = (*parsed)["value"];
        if (!type_matches(param.type, value) || value == valid_arguments[name]) continue;
        Json out = valid_arguments;
        out[name] = value;
        return out;
    }
    throw GenerationError("no same-typed invalid value for parameter '" + name + "' after one re-ask");
}

std::string template_error_message(const FormatIssue& issue) {
    switch (issue.kind) {
    case FormatIssueKind::missing_required: return "Error: missing required parameter '" + issue.name + "'";
    case FormatIssueKind::unknown_parameter: return "Error: unexpected parameter '" + issue.name + "'";
    case FormatIssueKind::type_mismatch:
        return "Error: parameter '" + issue.name + "' expected " + issue.expected + ", got " + issue.actual;
    default: return "Error: " + issue.message();
    }
}

namespace {

// Describes the single changed argument of an invalid_value corruption.
std::string describe_invalid_value(const ToolSpec& tool, const Json& valid, const Json& corrupted) {
    for (const auto& [key, value] : corrupted.items()) {
        if (valid.contains(key) && valid[key] == value) continue;
        std::string out = "parameter '" + key + "' has the value " + value.dump() +
                          ", which is not a meaningful value";
        if (const auto it = tool.parameters.find(key); it != tool.parameters.end() && !it->second.description.empty()) {
            out += " for: " + it->second.description;
        }
        return out;
    }
    throw PreconditionError("corrupted input does not differ from the valid input");
}

} // namespace

std::string generate_error_message(const ToolSpec& tool, ErrorKind kind, const Json& valid, const Json& corrupted,
                                   Backend* backend, const ErrorMessageOptions& options,
                                   const PromptTemplates& prompts) {
    if (valid == corrupted) throw PreconditionError("corrupted input does not differ from the valid input");
    std::optional<FormatIssue> issue;
    std::string problem;
    if (is_structural(kind)) {
        for (const auto& i : check_arguments(tool, corrupted)) {
            if (i.kind == expected_issue(kind)) {
                issue = i;
                break;
            }
        }
        if (!issue) {
            throw PreconditionError("input carries no " + std::string(issue_name(expected_issue(kind))) +
                                    " issue for kind " + std::string(to_string(kind)));
        }
        problem = issue->message();
        if (!options.use_backend || !backend) return template_error_message(*issue);
    } else {
        if (!check_arguments(tool, corrupted).empty()) {
            throw PreconditionError("invalid_value input must pass the format check");
        }
        problem = describe_invalid_value(tool, valid, corrupted);
        if (!options.use_backend || !backend) {
            throw PreconditionError("invalid_value messages need a backend");
        }
    }

    try {
        const auto reply = backend->generate(prompts.request("error_message", tags::error_message,
                                                             {{"tool_spec", to_json(tool).dump(2)},
                                                              {"kind", std::string(to_string(kind))},
                                                              {"arguments", corrupted.dump(2)},
                                                              {"problem", problem}}));
        std::string message = trim(reply.text);
        if (!message.empty()) return message;
        if (issue && options.allow_fallback) return template_error_message(*issue);
        throw GenerationError("empty error message completion");
    } catch (const BackendError&) {
        if (issue && options.allow_fallback) return template_error_message(*issue);
        throw;
    }
}

Json to_json(const ErrorSample& sample) {
    return {{"sample_id", sample.sample_id},
            {"tool_id", sample.tool_id},
            {"scenario", "error"},
            {"kind", to_string(sample.kind)},
            {"valid_input", sample.valid_input.arguments},
            {"corrupted_input", sample.corrupted_input.arguments},
            {"message", sample.message},
            {"verdict",
             {{"format", to_json(sample.verdict.format)},
              {"exist", to_json(sample.verdict.exist)},
              {"quality", to_json(sample.verdict.quality)}}}};
}

ErrorSample error_sample_from_json(const Json& record) {
    try {
        if (record.value("scenario", std::string("error")) != "error") {
            throw ParseError("record is not an error sample");
        }
        ErrorSample s;
        s.sample_id = record.at("sample_id").get<std::string>();
        s.tool_id = record.at("tool_id").get<std::string>();
        const auto kind = parse_error_kind(record.at("kind").get<std::string>());
        if (!kind) throw ParseError("unknown error kind '" + record.at("kind").get<std::string>() + "'");
        s.kind = *kind;
        s.valid_input = {s.tool_id, record.at("valid_input")};
        s.corrupted_input = {s.tool_id, record.at("corrupted_input")};
        s.message = record.at("message").get<std::string>();
        const auto& v = record.at("verdict");
        s.verdict.format = check_from_json(v.at("format"));
        s.verdict.exist = check_from_json(v.at("exist"));
        s.verdict.quality = check_from_json(v.at("quality"));
        return s;
    } catch (const Json::exception& e) {
        throw ParseError(std::string("malformed error sample: ") + e.what());
    }
}

CheckResult error_format_check(const ToolSpec& tool, ErrorKind kind, const Json& corrupted) {
    const auto issues = check_arguments(tool, corrupted);
    if (!is_structural(kind)) {
        if (issues.empty()) return CheckResult::pass();
        return CheckResult::fail("invalid_value input fails the format check: " + issues.front().message());
    }
    if (issues.empty()) return CheckResult::fail("corrupted input passes the format check");
    if (issues.front().kind != expected_issue(kind)) {
        return CheckResult::fail("expected a " + std::string(issue_name(expected_issue(kind))) + " issue, got " +
                                 std::string(issue_name(issues.front().kind)) + ": " + issues.front().message());
    }
    return CheckResult::pass();
}

ErrorVerdict validate_error_sample(const ErrorSample& sample, const ToolSpec& tool, Backend& backend,
                                   const PromptTemplates& prompts) {
    ErrorVerdict v;
    v.format = error_format_check(tool, sample.kind, sample.corrupted_input.arguments);
    if (!v.format.passed()) return v;
    const std::string spec = to_json(tool).dump(2);
    const std::string args = sample.corrupted_input.arguments.dump(2);
    v.exist = ask_judge(backend, prompts.request("judge_exist", tags::judge_exist,
                                                 {{"tool_spec", spec},
                                                  {"kind", std::string(to_string(sample.kind))},
                                                  {"arguments", args}}));
    if (!v.exist.passed()) return v;
    v.quality = ask_judge(backend, prompts.request("judge_quality", tags::judge_quality,
                                                   {{"tool_spec", spec}, {"arguments", args}, {"message", sample.message}}));
    return v;
}

std::vector<ErrorKind> applicable_kinds(const ToolSpec& tool, const Json& valid_arguments) {
    std::vector<ErrorKind> out;
    const auto names = present_params(tool, valid_arguments);
    if (!names.empty()) out.push_back(ErrorKind::type_error);
    if (!tool.required.empty()) out.push_back(ErrorKind::missing_required);
    out.push_back(ErrorKind::excess_param);
    if (std::any_of(names.begin(), names.end(),
                    [&](const std::string& n) { return invalid_value_slot(tool.parameters.at(n).type); })) {
        out.push_back(ErrorKind::invalid_value);
    }
    return out;
}

namespace {

struct ToolErrors {
    std::vector<ErrorSample> samples;
    ErrorGenerationReport report;
};

ToolErrors errors_for_tool(const ToolSpec& tool, const std::string& tool_id, const std::vector<Json>& inputs,
                           Backend& backend, const ErrorGenerationOptions& options, const PromptTemplates& prompts) {
    ToolErrors out;
    auto& rep = out.report;
    if (inputs.empty()) return out;
    const Rng base(options.rng_seed);
    for (std::size_t i = 0; i < options.per_tool; ++i) {
        ++rep.attempted;
        const Json& valid = inputs[i % inputs.size()];
        const auto kinds = applicable_kinds(tool, valid);
        const ErrorKind kind = kinds[i % kinds.size()];
        Rng rng = base.fork(tool_id + "/" + std::to_string(i));

        ErrorSample sample;
        sample.tool_id = tool_id;
        sample.kind = kind;
        sample.valid_input = {tool_id, valid};
        try {
            Json corrupted;
            switch (kind) {
            case ErrorKind::type_error: corrupted = inject_type_error(tool, valid, rng); break;
            case ErrorKind::missing_required: corrupted = inject_missing_required(tool, valid, rng); break;
            case ErrorKind::excess_param: corrupted = inject_excess_param(tool, valid, rng); break;
            case ErrorKind::invalid_value: corrupted = inject_invalid_value(tool, valid, backend, rng, prompts); break;
            }
            sample.corrupted_input = {tool_id, std::move(corrupted)};
            sample.message = generate_error_message(tool, kind, valid, sample.corrupted_input.arguments, &backend,
                                                    options.messages, prompts);
        } catch (const InapplicableError&) {
            ++rep.inapplicable;
            continue;
        } catch (const GenerationError&) {
            ++rep.generator_errors;
            continue;
        } catch (const BackendError&) {
            ++rep.generator_errors;
            continue;
        }
        try {
            sample.verdict = validate_error_sample(sample, tool, backend, prompts);
        } catch (const BackendError&) {
            ++rep.unevaluated;
            continue;
        }
        if (!sample.verdict.passed()) {
            ++rep.validation_failures;
            continue;
        }
        sample.sample_id = tool_id + "-e" + std::to_string(out.samples.size());
        out.samples.push_back(std::move(sample));
    }
    rep.accepted = out.samples.size();
    return out;
}

} // namespace

ErrorCorpus run_error_generation(const std::vector<ToolSpec>& tools, const std::vector<SingleTurnSample>& valid_samples,
                                 Backend& backend, const ErrorGenerationOptions& options, std::size_t workers,
                                 const PromptTemplates& prompts) {
    std::map<std::string, const ToolSpec*> by_id;
    for (const auto& t : tools) by_id.emplace(t.id(), &t);
    std::map<std::string, std::vector<Json>> inputs;
    for (const auto& s : valid_samples) {
        if (s.verdict.passed()) inputs[s.tool_id].push_back(s.input.arguments);
    }
    std::vector<std::pair<std::string, const ToolSpec*>> order(by_id.begin(), by_id.end());

    const auto results = parallel_map(order.size(), workers, [&](std::size_t k) {
        const auto it = inputs.find(order[k].first);
        static const std::vector<Json> none;
        return errors_for_tool(*order[k].second, order[k].first, it == inputs.end() ? none : it->second, backend,
                               options, prompts);
    });

    ErrorCorpus corpus;
    for (const auto& r : results) {
        corpus.samples.insert(corpus.samples.end(), r.samples.begin(), r.samples.end());
        corpus.report.attempted += r.report.attempted;
        corpus.report.inapplicable += r.report.inapplicable;
        corpus.report.generator_errors += r.report.generator_errors;
        corpus.report.validation_failures += r.report.validation_failures;
        corpus.report.unevaluated += r.report.unevaluated;
        corpus.report.accepted += r.report.accepted;
    }
    return corpus;
}

} // namespace toolweaver
