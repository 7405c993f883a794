#include "toolweaver/carg_single.hpp"

#include "toolweaver/errors.hpp"
#include "toolweaver/parallel.hpp"
#include "toolweaver/rng.hpp"

#include <algorithm>

namespace toolweaver {

namespace {

std::string failure_block(const std::vector<std::string>& reasons) {
    if (reasons.empty()) return {};
    std::string out = "Earlier examples were rejected for these reasons (avoid them):\n";
    for (const auto& r : reasons) out += "- " + r + "\n";
    return out;
}

std::string pretty(const Json& value) { return value.dump(2); }

} // namespace

Json to_json(const SingleTurnSample& sample) {
    return {{"sample_id", sample.sample_id},
            {"tool_id", sample.tool_id},
            {"scenario", "single"},
            {"input", sample.input.arguments},
            {"output", sample.output.to_json()},
            {"verdict", to_json(sample.verdict)},
            {"attempt", sample.attempt},
            {"refined", sample.refined},
            {"domain_context", sample.domain_context}};
}

SingleTurnSample single_sample_from_json(const Json& record) {
    try {
        if (record.value("scenario", std::string("single")) != "single") {
            throw ParseError("record is not a single-turn sample");
        }
        SingleTurnSample s;
        s.sample_id = record.at("sample_id").get<std::string>();
        s.tool_id = record.at("tool_id").get<std::string>();
        s.input = {s.tool_id, record.at("input")};
        if (!s.input.arguments.is_object()) throw ParseError("sample input must be an object");
        s.output = ToolOutput::from_json(record.at("output"));
        s.verdict = verdict_from_json(record.at("verdict"));
        s.attempt = record.value("attempt", std::size_t{1});
        s.refined = record.value("refined", false);
        s.domain_context = record.value("domain_context", std::string());
        return s;
    } catch (const Json::exception& e) {
        throw ParseError(std::string("malformed single-turn sample: ") + e.what());
    }
}

std::string domain_context(const ToolSpec& tool, std::string_view notes) {
    std::string out = tool.field;
    if (tool.subfield && !tool.subfield->empty()) out += (out.empty() ? "" : " / ") + *tool.subfield;
    if (!notes.empty()) out += (out.empty() ? "" : "; ") + std::string(notes);
    return out;
}

GeneratedPairs generate_pairs(const ToolSpec& tool, std::string_view domain_context, Backend& backend,
                              const PairRequest& request, const PromptTemplates& prompts) {
    GeneratedPairs out;
    if (request.count == 0) return out;

    const auto reply = backend.generate(prompts.request(
        "single_generate", tags::single_generate,
        {{"tool_spec", pretty(to_json(tool))},
         {"domain_context", std::string(domain_context)},
         {"count", std::to_string(request.count)},
         {"request", std::to_string(request.request_number)},
         {"seed", std::to_string(request.rng_seed)},
         {"failures", failure_block(request.failures)}}));

    const auto parsed = extract_first_record(reply.text, true);
    if (!parsed) {
        ++out.parse_drops;
        return out;
    }
    std::vector<Json> elements;
    if (parsed->is_array()) {
        elements.assign(parsed->begin(), parsed->end());
    } else {
        elements.push_back(*parsed);
    }
    for (const auto& e : elements) {
        if (!e.is_object() || !e.contains("input") || !e.contains("output") ||
            !(e["output"].is_object() || e["output"].is_string())) {
            ++out.parse_drops;
            continue;
        }
        out.candidates.push_back({{tool.id(), e["input"]}, ToolOutput::from_json(e["output"])});
    }
    return out;
}

CheckResult validate_logic(const ToolCallInput& input, const ToolOutput& output, Backend& backend,
                           const PromptTemplates& prompts) {
    return ask_judge(backend, prompts.request("judge_logic", tags::judge_logic,
                                              {{"arguments", pretty(input.arguments)},
                                               {"output", pretty(output.to_json())}}));
}

CheckResult validate_semantics(const ToolSpec& tool, const ToolCallInput& input, const ToolOutput& output,
                               Backend& backend, const PromptTemplates& prompts) {
    return ask_judge(backend, prompts.request("judge_sem", tags::judge_sem,
                                              {{"tool_spec", pretty(to_json(tool))},
                                               {"arguments", pretty(input.arguments)},
                                               {"output", pretty(output.to_json())}}));
}

ValidationVerdict validate_pair(const ToolSpec& tool, const ToolCallInput& input, const ToolOutput& output,
                                Backend& backend, const PromptTemplates& prompts) {
    ValidationVerdict v;
    v.format = validate_format(tool, input, output);
    if (!v.format.passed()) return v;
    v.logic = validate_logic(input, output, backend, prompts);
    if (!v.logic.passed()) return v;
    v.sem = validate_semantics(tool, input, output, backend, prompts);
    return v;
}

SingleTurnResult run_single_turn(const ToolSpec& tool, Backend& backend, const SingleTurnOptions& options,
                                 const PromptTemplates& prompts) {
    if (options.quota == 0) throw PreconditionError("single-turn quota must be at least 1");
    if (const auto verdict = validate_tool_spec(tool); !verdict.passed()) {
        throw PreconditionError("invalid tool spec: " + verdict.reasons.front());
    }

    SingleTurnResult result;
    auto& rep = result.report;
    rep.tool_id = tool.id();
    const std::string context = domain_context(tool, options.domain_notes);
    std::vector<std::string> failures;

    for (std::size_t attempt = 1; attempt <= options.max_attempts && result.samples.size() < options.quota;
         ++attempt) {
        ++rep.attempts;
        const bool refined = !failures.empty();
        const auto pairs = generate_pairs(
            tool, context, backend,
            {options.quota - result.samples.size(), attempt, options.rng_seed, failures}, prompts);
        rep.parse_drops += pairs.parse_drops;
        rep.candidates += pairs.candidates.size();
        if (pairs.parse_drops > 0 && pairs.candidates.empty()) {
            failures.emplace_back("reply contained no JSON array of {input, output} examples");
        }

        for (const auto& candidate : pairs.candidates) {
            if (result.samples.size() == options.quota) break;
            ValidationVerdict verdict;
            verdict.format = validate_format(tool, candidate.input, candidate.output);
            if (!verdict.format.passed()) {
                ++rep.format_failures;
                failures.push_back("format: " + verdict.format.reason);
                continue;
            }
            try {
                verdict.logic = validate_logic(candidate.input, candidate.output, backend, prompts);
                if (!verdict.logic.passed()) {
                    ++rep.logic_failures;
                    failures.push_back("logic: " + verdict.logic.reason);
                    continue;
                }
                verdict.sem = validate_semantics(tool, candidate.input, candidate.output, backend, prompts);
                if (!verdict.sem.passed()) {
                    ++rep.sem_failures;
                    failures.push_back("semantics: " + verdict.sem.reason);
                    continue;
                }
            } catch (const BackendError&) {
                // A judge that could not be reached leaves the pair unevaluated, not failed.
                ++rep.unevaluated;
                continue;
            }
            SingleTurnSample sample;
            sample.sample_id = rep.tool_id + "-s" + std::to_string(result.samples.size());
            sample.tool_id = rep.tool_id;
            sample.input = candidate.input;
            sample.output = candidate.output;
            sample.verdict = std::move(verdict);
            sample.domain_context = context;
            sample.attempt = attempt;
            sample.refined = refined;
            result.samples.push_back(std::move(sample));
        }
    }
    rep.accepted = result.samples.size();
    rep.low_yield = rep.accepted < options.quota;
    return result;
}

SingleTurnCorpus run_single_turn_corpus(const std::vector<ToolSpec>& tools, Backend& backend,
                                        const SingleTurnOptions& options, std::size_t workers,
                                        const PromptTemplates& prompts) {
    std::vector<const ToolSpec*> order;
    order.reserve(tools.size());
    for (const auto& t : tools) order.push_back(&t);
    std::vector<std::string> ids;
    for (const auto* t : order) ids.push_back(t->id());
    std::vector<std::size_t> idx(order.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });

    auto results = parallel_map(idx.size(), workers, [&](std::size_t k) {
        const ToolSpec& tool = *order[idx[k]];
        SingleTurnOptions per_tool = options;
        per_tool.rng_seed = Rng(options.rng_seed).fork(ids[idx[k]]).seed();
        try {
            return run_single_turn(tool, backend, per_tool, prompts);
        } catch (const BackendError& e) {
            SingleTurnResult failed;
            failed.report.tool_id = ids[idx[k]];
            failed.report.backend_error = e.what();
            failed.report.low_yield = true;
            return failed;
        }
    });

    SingleTurnCorpus corpus;
    for (auto& r : results) {
        for (auto& s : r.samples) corpus.samples.push_back(std::move(s));
        corpus.reports.push_back(std::move(r.report));
    }
    return corpus;
}

} // namespace toolweaver
