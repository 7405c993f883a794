#include "toolweaver/tool_registry.hpp"

#include "toolweaver/errors.hpp"
#include "toolweaver/rng.hpp"

#include <set>
#include <sstream>

namespace toolweaver {

namespace {

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> out;
    std::istringstream in{std::string(text)};
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

// Strips list markers, numbering, quotes and trailing punctuation from a completion line.
std::string clean_name(std::string_view line) {
    std::string s = trim(line);
    std::size_t i = 0;
    while (i < s.size() && (s[i] == '-' || s[i] == '*' || s[i] == '#' || s[i] == '"' ||
                            s[i] == '\'' || s[i] == '`' || std::isdigit(static_cast<unsigned char>(s[i])) ||
                            s[i] == '.' || s[i] == ')' || s[i] == ' ')) {
        ++i;
    }
    s = s.substr(i);
    while (!s.empty() && (s.back() == '"' || s.back() == '\'' || s.back() == '`' || s.back() == '.' ||
                          s.back() == ',' || s.back() == ' ')) {
        s.pop_back();
    }
    return to_lower_ascii(trim(s));
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::string failure_block(const std::vector<std::string>& reasons) {
    if (reasons.empty()) return {};
    std::string out = "Problems found in earlier attempts (avoid them):\n";
    for (const auto& r : reasons) out += "- " + r + "\n";
    return out;
}

} // namespace

Taxonomy expand_taxonomy(const std::vector<std::string>& seeds, Backend& backend,
                         const TaxonomyOptions& options, const PromptTemplates& prompts) {
    Taxonomy taxonomy;
    for (const auto& seed : seeds) {
        const std::string name = to_lower_ascii(trim(seed));
        if (name.empty() || taxonomy.contains_field(name)) continue;
        taxonomy.fields.push_back({name, true, {}});
    }
    if (taxonomy.fields.empty()) throw PreconditionError("taxonomy needs at least one seed field");

    Rng rng(options.rng_seed);
    std::size_t request = 0;
    std::size_t stalled = 0;
    while (taxonomy.size() < options.target_fields) {
        ++request;
        std::vector<std::string> names;
        for (const auto& f : taxonomy.fields) names.push_back(f.name);
        std::vector<std::string> exemplars;
        for (std::size_t idx : rng.sample_without_replacement(names.size(), 2)) {
            exemplars.push_back(names[idx]);
        }
        const auto reply = backend.generate(prompts.request(
            "taxonomy_field", tags::taxonomy_field,
            {{"existing", join(names, ", ")},
             {"exemplars", join(exemplars, ", ")},
             {"request", std::to_string(request)},
             {"seed", std::to_string(options.rng_seed)}}));

        std::string candidate;
        for (const auto& line : split_lines(reply.text)) {
            candidate = clean_name(line);
            if (!candidate.empty()) break;
        }
        if (!candidate.empty() && !taxonomy.contains_field(candidate)) {
            taxonomy.fields.push_back({candidate, false, {}});
            stalled = 0;
        } else if (++stalled >= options.max_stalled_rounds) {
            throw GenerationError("taxonomy expansion stalled: " + std::to_string(stalled) +
                                  " consecutive completions produced no new field");
        }
    }

    for (auto& field : taxonomy.fields) {
        std::set<std::string> seen;
        for (std::size_t attempt = 1;
             attempt <= options.max_attempts && field.subfields.size() < options.subfields_per_field;
             ++attempt) {
            const auto reply = backend.generate(prompts.request(
                "taxonomy_subfield", tags::taxonomy_subfield,
                {{"field", field.name},
                 {"count", std::to_string(options.subfields_per_field - field.subfields.size())},
                 {"request", std::to_string(attempt)}}));
            for (const auto& line : split_lines(reply.text)) {
                const std::string name = clean_name(line);
                if (name.empty() || !seen.insert(name).second) continue;
                field.subfields.push_back(name);
                if (field.subfields.size() == options.subfields_per_field) break;
            }
        }
        if (field.subfields.empty() && options.subfields_per_field > 0) {
            throw GenerationError("zero usable subfield completions for field '" + field.name + "'");
        }
    }
    return taxonomy;
}

std::vector<ToolSpec> generate_tools(const std::string& field, const std::string& subfield,
                                     Backend& backend, const ToolGenerationOptions& options,
                                     ToolGenerationReport* report, const PromptTemplates& prompts) {
    ToolGenerationReport local;
    ToolGenerationReport& rep = report ? *report : local;
    std::vector<ToolSpec> out;
    if (options.count == 0) return out;

    std::set<std::string> names;
    for (std::size_t attempt = 1; attempt <= options.max_attempts && out.size() < options.count;
         ++attempt) {
        ++rep.attempts;
        const auto reply = backend.generate(prompts.request(
            "tools_generate", tags::tools_generate,
            {{"field", field},
             {"subfield", subfield},
             {"count", std::to_string(options.count - out.size())},
             {"request", std::to_string(attempt)},
             {"seed", std::to_string(options.rng_seed)},
             {"failures", failure_block(rep.failure_reasons)}}));

        const auto parsed = extract_first_record(reply.text, true);
        if (!parsed) {
            ++rep.parse_drops;
            rep.failure_reasons.emplace_back("reply contained no JSON tool records");
            continue;
        }
        std::vector<Json> candidates;
        if (parsed->is_array()) {
            candidates.assign(parsed->begin(), parsed->end());
        } else if (parsed->contains("tools") && (*parsed)["tools"].is_array()) {
            candidates.assign((*parsed)["tools"].begin(), (*parsed)["tools"].end());
        } else {
            candidates.push_back(*parsed);
        }

        for (const auto& candidate : candidates) {
            if (out.size() == options.count) break;
            ToolSpec spec;
            try {
                spec = tool_spec_from_json(candidate);
            } catch (const ParseError& e) {
                ++rep.parse_drops;
                rep.failure_reasons.emplace_back(e.what());
                continue;
            }
            spec.field = field;
            spec.subfield = subfield;
            spec.source = ToolSource::generated;
            const auto verdict = validate_tool_spec(spec);
            if (!verdict.passed()) {
                ++rep.invalid;
                for (const auto& r : verdict.reasons) {
                    rep.failure_reasons.push_back(spec.api_name + ": " + r);
                }
                continue;
            }
            if (!names.insert(to_lower_ascii(trim(spec.api_name))).second) {
                ++rep.invalid;
                rep.failure_reasons.push_back("duplicate api_name '" + spec.api_name + "'");
                continue;
            }
            out.push_back(std::move(spec));
        }
    }
    if (out.empty()) {
        std::string detail = rep.failure_reasons.empty() ? "no candidates" : rep.failure_reasons.back();
        throw GenerationError("no valid tools for " + field + "/" + subfield + " after " +
                              std::to_string(rep.attempts) + " attempts: " + detail);
    }
    return out;
}

namespace {

bool fully_typed(const std::vector<ForeignField>& fields) {
    return std::all_of(fields.begin(), fields.end(), [](const ForeignField& f) {
        return f.type && normalize_type_name(*f.type).has_value();
    });
}

// Reads a parameters/responses block from a completion: a name → {type, description} map or
// an array of {name, type, description}.
std::map<std::string, ForeignField> completion_fields(const Json& block) {
    std::map<std::string, ForeignField> out;
    auto read = [&](const std::string& name, const Json& entry) {
        ForeignField f{name, std::nullopt, {}};
        if (entry.is_object()) {
            if (auto t = entry.find("type"); t != entry.end() && t->is_string()) f.type = t->get<std::string>();
            if (auto d = entry.find("description"); d != entry.end() && d->is_string()) {
                f.description = d->get<std::string>();
            }
        } else if (entry.is_string()) {
            f.type = entry.get<std::string>();
        }
        out[name] = std::move(f);
    };
    if (block.is_object()) {
        for (const auto& [name, entry] : block.items()) read(name, entry);
    } else if (block.is_array()) {
        for (const auto& entry : block) {
            if (entry.is_object() && entry.contains("name") && entry["name"].is_string()) {
                read(entry["name"].get<std::string>(), entry);
            }
        }
    }
    return out;
}

std::map<std::string, ParamSpec> to_specs(const std::vector<ForeignField>& fields) {
    std::map<std::string, ParamSpec> out;
    for (const auto& f : fields) out[f.name] = ParamSpec{f.name, *normalize_type_name(*f.type), f.description};
    return out;
}

} // namespace

std::vector<ToolSpec> import_external(const std::vector<ForeignToolRecord>& records, Backend* backend,
                                      std::size_t max_attempts, const PromptTemplates& prompts) {
    std::vector<ToolSpec> out;
    out.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const std::string where = "record " + std::to_string(i + 1);
        ForeignToolRecord record = records[i];
        if (trim(record.name).empty()) throw PreconditionError(where + ": missing name");
        if (trim(record.description).empty()) throw PreconditionError(where + ": missing description");

        bool complete = fully_typed(record.parameters) && record.responses && fully_typed(*record.responses);
        for (std::size_t attempt = 1; !complete && attempt <= max_attempts; ++attempt) {
            if (!backend) throw PreconditionError(where + ": incomplete schema and no backend to complete it");
            const auto reply = backend->generate(prompts.request(
                "tools_complete", tags::tools_complete,
                {{"record", to_json(record).dump(2)}, {"request", std::to_string(attempt)}}));
            const auto parsed = extract_first_record(reply.text);
            if (!parsed) continue;

            const auto params = completion_fields(parsed->value("parameters", Json::object()));
            for (auto& p : record.parameters) {
                if (p.type && normalize_type_name(*p.type)) continue;
                if (const auto it = params.find(p.name); it != params.end() && it->second.type &&
                                                          normalize_type_name(*it->second.type)) {
                    p.type = it->second.type;
                    if (p.description.empty()) p.description = it->second.description;
                }
            }
            if (!record.responses || !fully_typed(*record.responses)) {
                const auto responses = completion_fields(parsed->value("responses", Json::object()));
                std::vector<ForeignField> filled;
                bool ok = !responses.empty() || (record.responses && record.responses->empty());
                for (const auto& [name, f] : responses) {
                    if (!f.type || !normalize_type_name(*f.type)) {
                        ok = false;
                        break;
                    }
                    filled.push_back(f);
                }
                if (ok && !responses.empty()) record.responses = std::move(filled);
            }
            complete = fully_typed(record.parameters) && record.responses && fully_typed(*record.responses);
        }
        if (!complete) {
            throw GenerationError(where + " ('" + record.name + "'): schema completion failed after " +
                                  std::to_string(max_attempts) + " attempts");
        }

        ToolSpec spec;
        spec.api_name = trim(record.name);
        spec.api_description = trim(record.description);
        spec.field = record.field;
        spec.subfield = record.subfield;
        spec.parameters = to_specs(record.parameters);
        spec.responses = to_specs(*record.responses);
        spec.required = record.required;
        spec.source = ToolSource::imported;
        const auto verdict = validate_tool_spec(spec);
        if (!verdict.passed()) {
            throw ValidationError(where + " ('" + spec.api_name + "'): " + verdict.reasons.front());
        }
        out.push_back(std::move(spec));
    }
    return out;
}

} // namespace toolweaver
