#pragma once

#include "toolweaver/json_util.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace toolweaver {

enum class TypeTag { string, integer, number, boolean, array, object };

std::string_view to_string(TypeTag tag);
std::optional<TypeTag> parse_type_tag(std::string_view text);

/// True when `value` is acceptable for a slot declared as `tag`. Integers satisfy `number`.
bool type_matches(TypeTag tag, const Json& value);

/// One entry of a tool's "parameters" or "responses" block.
struct ParamSpec {
    std::string name;
    TypeTag type = TypeTag::string;
    std::string description;

    bool operator==(const ParamSpec&) const = default;
};

using ResponseFieldSpec = ParamSpec;

enum class ToolSource { generated, imported };

std::string_view to_string(ToolSource source);

/// The unified tool template: name, description, taxonomy field, typed parameters,
/// required list and typed response schema.
struct ToolSpec {
    std::string api_name;
    std::string api_description;
    std::string field;
    std::optional<std::string> subfield;
    std::map<std::string, ParamSpec> parameters;
    std::vector<std::string> required;
    std::map<std::string, ResponseFieldSpec> responses;
    ToolSource source = ToolSource::generated;

    /// "t_" followed by the first 16 hex digits of SHA-256 over the canonical serialization.
    std::string id() const;

    bool operator==(const ToolSpec&) const = default;
};

Json to_json(const ToolSpec& spec);

/// Canonical text form; identical specs always produce identical bytes.
std::string canonical_serialize(const ToolSpec& spec);

/// Builds a spec from an already-parsed record. Unknown keys, missing mandatory keys and
/// type tags outside the closed set are ParseErrors.
ToolSpec tool_spec_from_json(const Json& record);

/// Parses one record in the external tool-spec format.
ToolSpec parse_tool_spec(std::string_view text);

/// Parses a file body holding either one record or an array of records.
std::vector<ToolSpec> parse_tool_spec_file(std::string_view text);

/// Newline-delimited corpus: one tool record per non-blank line.
std::vector<ToolSpec> parse_tool_corpus(std::string_view text);
std::string serialize_tool_corpus(const std::vector<ToolSpec>& tools);

struct SpecVerdict {
    std::vector<std::string> reasons;
    bool passed() const noexcept { return reasons.empty(); }
};

/// Structural checks: non-empty name, non-empty and case-insensitively unique parameter and
/// response names, and every required name defined. One reason per violation.
SpecVerdict validate_tool_spec(const ToolSpec& spec);

} // namespace toolweaver
