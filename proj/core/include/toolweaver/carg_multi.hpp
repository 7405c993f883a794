#pragma once

#include "toolweaver/backend.hpp"
#include "toolweaver/embedding.hpp"
#include "toolweaver/prompts.hpp"
#include "toolweaver/tool_spec.hpp"
#include "toolweaver/validation.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace toolweaver {

using EmbeddingMap = std::map<std::string, EmbeddingVector, std::less<>>;

/// Embedding input: api_name + " " + api_description + " " + field.
std::string association_text(const ToolSpec& tool);

/// Embeds every tool keyed by id.
EmbeddingMap embed_tools(const std::vector<ToolSpec>& tools, Embedder& embedder);

struct ToolGroup {
    std::vector<std::string> member_ids; ///< seed first
    double coherence = 1.0;

    const std::string& seed_id() const { return member_ids.front(); }
    const std::string& target_id() const { return member_ids.back(); }

    bool operator==(const ToolGroup&) const = default;
};

/// Mean cosine over all ordered member pairs, self-pairs included.
double coherence(const std::vector<std::string>& member_ids, const EmbeddingMap& embeddings);

/// Greedy expansion from `seed_id`: repeatedly admit the non-member whose best cosine to any
/// member is highest, provided it exceeds `theta`; ties go to the lexicographically smallest
/// id. Stops at `max_size` or when nothing qualifies.
ToolGroup build_group(const std::string& seed_id, const EmbeddingMap& embeddings, double theta,
                      std::size_t max_size);

struct DialogueTurn {
    std::size_t index = 1;
    std::string user_utterance;
    std::string assistant_content;
    std::optional<ToolCallInput> tool_call;
    std::optional<ToolOutput> tool_result;
    Json context_update = Json::object();

    bool operator==(const DialogueTurn&) const = default;
};

struct MultiTurnVerdict {
    ValidationVerdict call; ///< three-level cascade on the final call
    CheckResult coherence;

    bool passed() const noexcept { return call.passed() && coherence.passed(); }

    bool operator==(const MultiTurnVerdict&) const = default;
};

struct MultiTurnSample {
    std::string sample_id; ///< "<seed_id>-m<index>"
    ToolGroup group;
    std::vector<DialogueTurn> turns;
    ToolCallInput final_call;
    ToolOutput final_output;
    MultiTurnVerdict verdict;

    const std::string& target_id() const { return group.target_id(); }

    bool operator==(const MultiTurnSample&) const = default;
};

/// Sample-sink record: {sample_id, scenario:"multi", group, turns, final_call, final_output,
/// verdict, coherence}.
Json to_json(const MultiTurnSample& sample);
MultiTurnSample multi_sample_from_json(const Json& record);

/// Context accumulated before turn t (1-based): union of context_update of turns 1..t-1,
/// later values replacing earlier ones for the same key.
Json accumulated_context(const std::vector<DialogueTurn>& turns, std::size_t t);

/// Plain-text transcript of turns [0, upto).
std::string render_history(const std::vector<DialogueTurn>& turns, std::size_t upto);

/// Index of the group member assigned to turn t, if any: with k members and L turns the
/// members occupy the last k turns in group order.
std::optional<std::size_t> assigned_member(std::size_t turn, std::size_t turns,
                                           std::size_t members);

/// Turn-by-turn synthesis with accumulated context. The last turn is written first as
/// conversation, then the final call of the target tool is produced from the whole
/// history and attached to it. Throws GenerationError naming the turn when a completion is
/// unparseable twice.
MultiTurnSample generate_dialogue(const ToolGroup& group,
                                  const std::map<std::string, ToolSpec, std::less<>>& tools,
                                  std::size_t turns, Backend& backend, std::uint64_t rng_seed,
                                  const PromptTemplates& prompts = PromptTemplates::defaults());

/// V_multi = cascade(final call) ∧ coherence judge over the history. The coherence judge runs
/// only when the cascade passes.
MultiTurnVerdict validate_multi(const MultiTurnSample& sample, const ToolSpec& target,
                                Backend& backend,
                                const PromptTemplates& prompts = PromptTemplates::defaults());

struct MultiTurnOptions {
    double theta = 0.30;
    std::size_t max_group_size = 3;
    std::size_t turns = 3; ///< L, at most 8
    std::size_t samples = 10;
    std::size_t max_epochs = 3;
    std::uint64_t rng_seed = 0;
    std::optional<double> min_coherence; ///< off by default
};

inline constexpr std::size_t kMaxTurns = 8;

struct MultiTurnReport {
    std::size_t groups = 0;
    std::size_t rejected_coherence = 0;
    std::size_t generation_errors = 0;
    std::size_t validation_failures = 0;
    std::size_t unevaluated = 0;
    std::size_t accepted = 0;
};

struct MultiTurnCorpus {
    std::vector<MultiTurnSample> samples; ///< ordered by (seed_id, sample index)
    MultiTurnReport report;
};

/// Seeds are drawn uniformly without replacement per epoch; groups within an epoch run on
/// up to `workers` threads and are accepted in draw order until `samples` are collected.
MultiTurnCorpus run_multi_turn(const std::vector<ToolSpec>& tools, Embedder& embedder,
                               Backend& backend, const MultiTurnOptions& options,
                               std::size_t workers,
                               const PromptTemplates& prompts = PromptTemplates::defaults());

} // namespace toolweaver
