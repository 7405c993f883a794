#pragma once

#include "toolweaver/backend.hpp"
#include "toolweaver/embedding.hpp"
#include "toolweaver/prompts.hpp"
#include "toolweaver/tool_spec.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <shared_mutex>
#include <string>
#include <vector>

namespace toolweaver {

// ---------------------------------------------------------------------------------------------
// Taxonomy
// ---------------------------------------------------------------------------------------------

struct TaxonomyField {
    std::string name;
    bool seed = false; ///< false when produced by the backend
    std::vector<std::string> subfields;

    bool operator==(const TaxonomyField&) const = default;
};

/// Two-level field → subfields hierarchy in insertion order.
struct Taxonomy {
    std::vector<TaxonomyField> fields;

    bool contains_field(std::string_view name) const; ///< case-insensitive
    const TaxonomyField* find(std::string_view name) const;
    std::size_t size() const noexcept { return fields.size(); }

    bool operator==(const Taxonomy&) const = default;
};

Json to_json(const Taxonomy& taxonomy);
Taxonomy taxonomy_from_json(const Json& value);

struct TaxonomyOptions {
    std::size_t target_fields = 12;
    std::size_t subfields_per_field = 3;
    std::uint64_t rng_seed = 0;
    /// Consecutive completions allowed to yield nothing new before giving up.
    std::size_t max_stalled_rounds = 16;
    /// Re-asks per subfield prompt when a completion has no usable line.
    std::size_t max_attempts = 3;
};

/// Grows `seeds` to `target_fields` fields by prompting with two exemplars sampled uniformly
/// without replacement, dropping case-insensitive duplicates, then asks for subfields of every
/// field. Throws GenerationError when the backend stops producing usable names.
Taxonomy expand_taxonomy(const std::vector<std::string>& seeds, Backend& backend,
                         const TaxonomyOptions& options,
                         const PromptTemplates& prompts = PromptTemplates::defaults());

// ---------------------------------------------------------------------------------------------
// Tool synthesis
// ---------------------------------------------------------------------------------------------

struct ToolGenerationOptions {
    std::size_t count = 5;
    std::size_t max_attempts = 3;
    std::uint64_t rng_seed = 0;
};

struct ToolGenerationReport {
    std::size_t attempts = 0;
    std::size_t parse_drops = 0;
    std::size_t invalid = 0;
    std::vector<std::string> failure_reasons;
};

/// Generates up to `count` tools for (field, subfield). Candidates failing to parse or
/// failing validate_tool_spec are discarded; every returned spec passes validation.
std::vector<ToolSpec> generate_tools(const std::string& field, const std::string& subfield,
                                     Backend& backend, const ToolGenerationOptions& options,
                                     ToolGenerationReport* report = nullptr,
                                     const PromptTemplates& prompts = PromptTemplates::defaults());

// ---------------------------------------------------------------------------------------------
// Deduplication
// ---------------------------------------------------------------------------------------------

enum class DedupKey { name, description };

std::string_view to_string(DedupKey key);
std::optional<DedupKey> parse_dedup_key(std::string_view text);

struct RemovedDuplicate {
    std::string kept_id;
    std::string removed_id;
    double similarity = 0.0;
};

struct DedupResult {
    std::vector<ToolSpec> kept;
    std::vector<RemovedDuplicate> removed;
};

/// Greedy first-survivor filtering in input order: a tool is dropped iff the cosine between
/// its key embedding and some earlier kept tool's is strictly greater than `threshold`.
/// `kept_id` names the most similar kept tool (earliest on ties).
DedupResult deduplicate(const std::vector<ToolSpec>& tools, Embedder& embedder,
                        double threshold = 0.8, DedupKey key = DedupKey::name);

// ---------------------------------------------------------------------------------------------
// External corpora
// ---------------------------------------------------------------------------------------------

/// A parameter or response field as found in a foreign corpus; the type may be missing or
/// spelled with a common alias (str, int, float, bool, list, dict).
struct ForeignField {
    std::string name;
    std::optional<std::string> type;
    std::string description;

    bool operator==(const ForeignField&) const = default;
};

/// A tool record extracted from a foreign corpus, before normalisation.
struct ForeignToolRecord {
    std::string name;
    std::string description;
    std::string field;
    std::optional<std::string> subfield;
    std::vector<ForeignField> parameters;
    std::vector<std::string> required;
    std::optional<std::vector<ForeignField>> responses;

    bool operator==(const ForeignToolRecord&) const = default;
};

Json to_json(const ForeignToolRecord& record);

/// Maps a foreign type spelling to the closed type set.
std::optional<TypeTag> normalize_type_name(std::string_view text);

/// Converts foreign records to ToolSpecs with source=imported. Records with complete typed
/// schemas are mapped directly; missing types or response schemas are completed by the
/// backend. Throws PreconditionError naming the record index for records without a name and
/// ValidationError for records that still fail validate_tool_spec.
std::vector<ToolSpec> import_external(const std::vector<ForeignToolRecord>& records,
                                      Backend* backend, std::size_t max_attempts = 3,
                                      const PromptTemplates& prompts = PromptTemplates::defaults());

// ---------------------------------------------------------------------------------------------
// Corpus overlap
// ---------------------------------------------------------------------------------------------

struct OverlapPair {
    std::string a_id;
    std::string b_id;
    double similarity = 0.0;
};

struct EmbeddingRow {
    std::string id;
    std::string corpus; ///< "a" or "b"
    EmbeddingVector vector;
};

struct OverlapReport {
    double fraction_a_matched = 0.0;
    double fraction_b_matched = 0.0;
    std::vector<OverlapPair> pairs; ///< each matched A tool with its nearest B neighbour
    std::vector<EmbeddingRow> coordinates;
};

/// Text embedded for overlap analysis: api_name + " " + api_description.
std::string overlap_text(const ToolSpec& tool);

/// A tool is matched iff the cosine to its nearest neighbour in the other corpus exceeds
/// `threshold`.
OverlapReport corpus_overlap(const std::vector<ToolSpec>& corpus_a,
                             const std::vector<ToolSpec>& corpus_b, Embedder& embedder,
                             double threshold);

/// Comma-separated export with columns id, corpus, dim_0..dim_{k-1}.
void write_overlap_csv(const OverlapReport& report, std::ostream& out);

// ---------------------------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------------------------

/// Tool lookup by id; safe for concurrent readers and writers.
class ToolRegistry {
public:
    ToolRegistry() = default;
    explicit ToolRegistry(const std::vector<ToolSpec>& tools);

    /// Validates and inserts; returns the id. Throws ValidationError for invalid specs.
    std::string add(ToolSpec spec);
    std::optional<ToolSpec> find(std::string_view id) const;
    std::vector<ToolSpec> list() const;
    std::size_t size() const;

private:
    mutable std::shared_mutex mutex_;
    std::map<std::string, ToolSpec, std::less<>> tools_;
};

} // namespace toolweaver
