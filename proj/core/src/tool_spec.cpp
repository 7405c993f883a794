#include "toolweaver/tool_spec.hpp"

#include "toolweaver/errors.hpp"

#include <set>

namespace toolweaver {

std::string_view to_string(TypeTag tag) {
    switch (tag) {
    case TypeTag::string:
        return "string";
    case TypeTag::integer:
        return "integer";
    case TypeTag::number:
        return "number";
    case TypeTag::boolean:
        return "boolean";
    case TypeTag::array:
        return "array";
    case TypeTag::object:
        return "object";
    }
    return "string";
}

std::optional<TypeTag> parse_type_tag(std::string_view text) {
    for (TypeTag tag : {TypeTag::string, TypeTag::integer, TypeTag::number, TypeTag::boolean,
                        TypeTag::array, TypeTag::object}) {
        if (text == to_string(tag)) return tag;
    }
    return std::nullopt;
}

bool type_matches(TypeTag tag, const Json& value) {
    switch (tag) {
    case TypeTag::string:
        return value.is_string();
    case TypeTag::integer:
        return value.is_number_integer();
    case TypeTag::number:
        return value.is_number();
    case TypeTag::boolean:
        return value.is_boolean();
    case TypeTag::array:
        return value.is_array();
    case TypeTag::object:
        return value.is_object();
    }
    return false;
}

std::string_view to_string(ToolSource source) {
    return source == ToolSource::imported ? "imported" : "generated";
}

namespace {

Json fields_to_json(const std::map<std::string, ParamSpec>& fields) {
    Json out = Json::object();
    for (const auto& [name, spec] : fields) {
        out[name] = {{"type", to_string(spec.type)}, {"description", spec.description}};
    }
    return out;
}

const std::string& require_string(const Json& record, const char* key) {
    const auto it = record.find(key);
    if (it == record.end()) throw ParseError(std::string("missing mandatory key '") + key + "'");
    if (!it->is_string()) throw ParseError(std::string("key '") + key + "' must be a string");
    return it->get_ref<const std::string&>();
}

std::map<std::string, ParamSpec> fields_from_json(const Json& block, std::string_view what) {
    if (!block.is_object()) throw ParseError(std::string(what) + " must be an object");
    std::map<std::string, ParamSpec> out;
    const std::string singular = what == "parameters" ? "parameter" : "response field";
    for (const auto& [name, entry] : block.items()) {
        const std::string label = singular + " '" + name + "'";
        if (!entry.is_object()) throw ParseError(label + " must be an object");
        for (const auto& [key, _] : entry.items()) {
            if (key != "type" && key != "description") {
                throw ParseError(label + ": unknown key '" + key + "'");
            }
        }
        const auto type_it = entry.find("type");
        if (type_it == entry.end() || !type_it->is_string()) {
            throw ParseError(label + ": missing string 'type'");
        }
        const auto tag = parse_type_tag(type_it->get<std::string>());
        if (!tag) {
            throw ParseError(label + ": unknown type '" + type_it->get<std::string>() + "'");
        }
        ParamSpec spec{name, *tag, {}};
        if (const auto d = entry.find("description"); d != entry.end()) {
            if (!d->is_string()) throw ParseError(label + ": description must be a string");
            spec.description = d->get<std::string>();
        }
        out.emplace(name, std::move(spec));
    }
    return out;
}

} // namespace

std::string ToolSpec::id() const {
    return "t_" + sha256_hex(canonical_serialize(*this)).substr(0, 16);
}

Json to_json(const ToolSpec& spec) {
    Json out = {
        {"api_name", spec.api_name},
        {"api_description", spec.api_description},
        {"field", spec.field},
        {"parameters", fields_to_json(spec.parameters)},
        {"required", spec.required},
        {"responses", fields_to_json(spec.responses)},
        {"source", to_string(spec.source)},
    };
    if (spec.subfield) out["subfield"] = *spec.subfield;
    return out;
}

std::string canonical_serialize(const ToolSpec& spec) { return canonical_dump(to_json(spec)); }

ToolSpec tool_spec_from_json(const Json& record) {
    static const std::set<std::string, std::less<>> known{
        "api_name", "api_description", "field",  "subfield",
        "parameters", "required",      "responses", "source"};
    if (!record.is_object()) throw ParseError("tool record must be an object");
    for (const auto& [key, _] : record.items()) {
        if (!known.contains(key)) throw ParseError("unknown key '" + key + "'");
    }
    for (const char* key : {"parameters", "required", "responses"}) {
        if (!record.contains(key)) {
            throw ParseError(std::string("missing mandatory key '") + key + "'");
        }
    }

    ToolSpec spec;
    spec.api_name = require_string(record, "api_name");
    spec.api_description = require_string(record, "api_description");
    if (record.contains("field")) spec.field = require_string(record, "field");
    if (record.contains("subfield")) spec.subfield = require_string(record, "subfield");
    spec.parameters = fields_from_json(record.at("parameters"), "parameters");
    spec.responses = fields_from_json(record.at("responses"), "responses");

    const Json& required = record.at("required");
    if (!required.is_array()) throw ParseError("required must be an array");
    for (const auto& name : required) {
        if (!name.is_string()) throw ParseError("required entries must be strings");
        spec.required.push_back(name.get<std::string>());
    }

    if (record.contains("source")) {
        const auto& source = require_string(record, "source");
        if (source == "generated") {
            spec.source = ToolSource::generated;
        } else if (source == "imported") {
            spec.source = ToolSource::imported;
        } else {
            throw ParseError("unknown source '" + source + "'");
        }
    }
    return spec;
}

ToolSpec parse_tool_spec(std::string_view text) { return tool_spec_from_json(parse_strict(text)); }

std::vector<ToolSpec> parse_tool_spec_file(std::string_view text) {
    const Json parsed = parse_strict(text);
    std::vector<ToolSpec> out;
    if (parsed.is_array()) {
        for (std::size_t i = 0; i < parsed.size(); ++i) {
            try {
                out.push_back(tool_spec_from_json(parsed[i]));
            } catch (const ParseError& e) {
                throw ParseError("record " + std::to_string(i + 1) + ": " + e.what());
            }
        }
    } else {
        out.push_back(tool_spec_from_json(parsed));
    }
    return out;
}

std::vector<ToolSpec> parse_tool_corpus(std::string_view text) {
    std::vector<ToolSpec> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        const std::string_view line =
            text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        ++line_no;
        if (!trim(line).empty()) {
            try {
                out.push_back(parse_tool_spec(line));
            } catch (const ParseError& e) {
                throw ParseError(e.what(), line_no);
            }
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return out;
}

std::string serialize_tool_corpus(const std::vector<ToolSpec>& tools) {
    std::string out;
    for (const auto& tool : tools) {
        out += canonical_serialize(tool);
        out += '\n';
    }
    return out;
}

namespace {

void check_names(const std::map<std::string, ParamSpec>& fields, std::string_view what,
                 std::vector<std::string>& reasons) {
    std::set<std::string> folded;
    for (const auto& [key, spec] : fields) {
        const std::string name = trim(key);
        if (name.empty()) {
            reasons.push_back(std::string(what) + " with empty name");
            continue;
        }
        if (spec.name != key) {
            reasons.push_back(std::string(what) + " '" + key + "' carries mismatched name '" +
                              spec.name + "'");
        }
        if (!folded.insert(to_lower_ascii(name)).second) {
            reasons.push_back("duplicate " + std::string(what) + " name '" + key + "'");
        }
    }
}

} // namespace

SpecVerdict validate_tool_spec(const ToolSpec& spec) {
    SpecVerdict verdict;
    if (trim(spec.api_name).empty()) verdict.reasons.emplace_back("api_name is empty");
    check_names(spec.parameters, "parameter", verdict.reasons);
    check_names(spec.responses, "response field", verdict.reasons);
    for (const auto& name : spec.required) {
        if (!spec.parameters.contains(name)) {
            verdict.reasons.push_back("required parameter '" + name + "' not defined");
        }
    }
    return verdict;
}

} // namespace toolweaver
