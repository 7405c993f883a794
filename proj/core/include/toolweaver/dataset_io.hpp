#pragma once

#include "toolweaver/backend.hpp"
#include "toolweaver/carg_error.hpp"
#include "toolweaver/carg_multi.hpp"
#include "toolweaver/carg_single.hpp"
#include "toolweaver/tool_registry.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace toolweaver {

using Sample = std::variant<SingleTurnSample, MultiTurnSample, ErrorSample>;

std::string_view scenario_name(const Sample& sample);
const std::string& sample_id(const Sample& sample);
/// Tool the sample trains: the tool of a single/error sample, the target of a multi sample.
const std::string& sample_tool_id(const Sample& sample);
bool sample_passed(const Sample& sample);

Json to_json(const Sample& sample);
/// Dispatches on the record's "scenario".
Sample sample_from_json(const Json& record);

/// Newline-delimited sample-sink records.
std::string serialize_samples(const std::vector<Sample>& samples);
std::vector<Sample> parse_samples(std::string_view text);

std::string read_file(const std::filesystem::path& path);
/// Writes via a temporary sibling and rename. Throws IoError.
void write_file(const std::filesystem::path& path, std::string_view contents);

struct SftMeta {
    std::string scenario;
    std::string tool_id;
    std::string sample_id;

    bool operator==(const SftMeta&) const = default;
};

/// Chat record: system (instructions + canonical tool spec), user (the call; multi-turn
/// history flattened into a transcript block), assistant (tool output or error message).
struct SftRecord {
    std::vector<ChatMessage> messages;
    SftMeta meta;

    bool operator==(const SftRecord&) const = default;
};

Json to_json(const SftRecord& record);
SftRecord sft_record_from_json(const Json& value);

/// Builds the record for one verdict-passing sample. Throws ValidationError when the sample
/// failed validation and PreconditionError when its tool is unknown.
SftRecord make_sft_record(const Sample& sample, const ToolRegistry& tools);

/// All records in (scenario, tool_id, sample_id) order, one per line. Refuses the whole
/// export (ValidationError naming the sample) if any sample failed validation.
std::string render_sft(const std::vector<Sample>& samples, const ToolRegistry& tools);

/// render_sft written to `path`; returns the record count.
std::size_t export_sft(const std::vector<Sample>& samples, const ToolRegistry& tools,
                       const std::filesystem::path& path);

/// Source-field mapping for foreign corpora, read from "key = value" lines ('#' comments).
/// Keys: name, description, params (required); required, responses, field, subfield,
/// param_name, param_type, param_description (optional). Values are dotted paths.
struct MappingProfile {
    std::map<std::string, std::string, std::less<>> entries;

    static MappingProfile parse(std::string_view text);
    static MappingProfile load(const std::filesystem::path& path);
    /// Profile reading this project's own tool-spec records.
    static MappingProfile native();

    std::optional<std::string> get(std::string_view key) const;
};

struct ImportIssue {
    std::size_t record = 0; ///< 1-based record number
    std::string message;
};

struct ForeignImport {
    std::vector<ForeignToolRecord> records;
    std::vector<ImportIssue> issues;
};

/// Extracts records from `text` (a JSON array, one JSON object, or newline-delimited
/// objects). Records lacking a mapped name or description are reported and skipped.
/// Throws ValidationError when the profile lacks name, description or params.
ForeignImport import_foreign_text(std::string_view text, const MappingProfile& profile);
ForeignImport import_foreign(const std::filesystem::path& path, const MappingProfile& profile);

struct CorpusStats {
    std::size_t count = 0;
    std::map<std::string, std::size_t> scenarios; ///< single / multi / error always present
    std::map<std::string, std::size_t> fields;    ///< tool records by field
    std::map<std::size_t, std::size_t> parameter_histogram; ///< parameter count → tools
};

Json to_json(const CorpusStats& stats);

/// One pass over newline-delimited sample or tool records. ParseError cites the line.
CorpusStats corpus_stats_text(std::string_view text);
CorpusStats corpus_stats(const std::filesystem::path& path);

} // namespace toolweaver
