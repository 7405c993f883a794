#pragma once

#include "toolweaver/backend.hpp"
#include "toolweaver/prompts.hpp"
#include "toolweaver/tool_spec.hpp"
#include "toolweaver/validation.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace toolweaver {

struct SingleTurnSample {
    std::string sample_id; ///< "<tool_id>-s<index>"
    std::string tool_id;
    ToolCallInput input;
    ToolOutput output;
    ValidationVerdict verdict;
    std::string domain_context;
    std::size_t attempt = 1;
    bool refined = false; ///< generated from a prompt carrying failure feedback

    bool operator==(const SingleTurnSample&) const = default;
};

/// Sample-sink record: {sample_id, tool_id, scenario:"single", input, output, verdict,
/// attempt, refined, domain_context}.
Json to_json(const SingleTurnSample& sample);
SingleTurnSample single_sample_from_json(const Json& record);

/// Field, subfield and free-form notes joined into the domain context string.
std::string domain_context(const ToolSpec& tool, std::string_view notes = {});

struct PairCandidate {
    ToolCallInput input;
    ToolOutput output;
};

struct GeneratedPairs {
    std::vector<PairCandidate> candidates;
    std::size_t parse_drops = 0; ///< completions or array elements with no usable record
};

struct PairRequest {
    std::size_t count = 1;
    std::size_t request_number = 1;
    std::uint64_t rng_seed = 0;
    std::vector<std::string> failures; ///< feedback from earlier attempts
};

/// One generation call. Completion parsing takes the first balanced JSON literal; an array
/// yields one candidate per {input, output} element, a bare object yields one candidate.
/// count == 0 returns immediately without a backend call.
GeneratedPairs generate_pairs(const ToolSpec& tool, std::string_view domain_context,
                              Backend& backend, const PairRequest& request,
                              const PromptTemplates& prompts = PromptTemplates::defaults());

/// Judge call for parameter contradictions.
CheckResult validate_logic(const ToolCallInput& input, const ToolOutput& output, Backend& backend,
                           const PromptTemplates& prompts = PromptTemplates::defaults());

/// Judge call for input-output coherence against the tool spec.
CheckResult validate_semantics(const ToolSpec& tool, const ToolCallInput& input,
                               const ToolOutput& output, Backend& backend,
                               const PromptTemplates& prompts = PromptTemplates::defaults());

/// Full cascade. Judges run only after format passes, and sem only after logic passes.
/// A BackendError from a judge propagates.
ValidationVerdict validate_pair(const ToolSpec& tool, const ToolCallInput& input,
                                const ToolOutput& output, Backend& backend,
                                const PromptTemplates& prompts = PromptTemplates::defaults());

struct SingleTurnOptions {
    std::size_t quota = 5;
    std::size_t max_attempts = 3;
    std::uint64_t rng_seed = 0;
    std::string domain_notes;
};

struct SingleTurnReport {
    std::string tool_id;
    std::size_t attempts = 0;
    std::size_t candidates = 0;
    std::size_t parse_drops = 0;
    std::size_t format_failures = 0;
    std::size_t logic_failures = 0;
    std::size_t sem_failures = 0;
    std::size_t unevaluated = 0;
    std::size_t accepted = 0;
    bool low_yield = false; ///< quota not met after max_attempts
    std::string backend_error; ///< non-empty when generation itself failed
};

struct SingleTurnResult {
    std::vector<SingleTurnSample> samples;
    SingleTurnReport report;
};

/// Generate → validate loop for one tool until `quota` samples pass all three levels or
/// `max_attempts` is spent. Failure reasons accumulate into the next attempt's prompt.
SingleTurnResult run_single_turn(const ToolSpec& tool, Backend& backend,
                                 const SingleTurnOptions& options,
                                 const PromptTemplates& prompts = PromptTemplates::defaults());

struct SingleTurnCorpus {
    std::vector<SingleTurnSample> samples; ///< ordered by (tool_id, sample index)
    std::vector<SingleTurnReport> reports; ///< ordered by tool_id
};

/// run_single_turn over many tools on up to `workers` threads. Backend failures for one tool
/// are recorded in its report and do not stop the others.
SingleTurnCorpus run_single_turn_corpus(const std::vector<ToolSpec>& tools, Backend& backend,
                                        const SingleTurnOptions& options, std::size_t workers,
                                        const PromptTemplates& prompts = PromptTemplates::defaults());

} // namespace toolweaver
