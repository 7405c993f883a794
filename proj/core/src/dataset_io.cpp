#include "toolweaver/dataset_io.hpp"

#include "toolweaver/errors.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <tuple>

namespace toolweaver {

std::string_view scenario_name(const Sample& sample) {
    static constexpr std::string_view names[] = {"single", "multi", "error"};
    return names[sample.index()];
}

const std::string& sample_id(const Sample& sample) {
    return std::visit([](const auto& s) -> const std::string& { return s.sample_id; }, sample);
}

const std::string& sample_tool_id(const Sample& sample) {
    if (const auto* m = std::get_if<MultiTurnSample>(&sample)) return m->target_id();
    if (const auto* s = std::get_if<SingleTurnSample>(&sample)) return s->tool_id;
    return std::get<ErrorSample>(sample).tool_id;
}

bool sample_passed(const Sample& sample) {
    return std::visit([](const auto& s) { return s.verdict.passed(); }, sample);
}

Json to_json(const Sample& sample) {
    return std::visit([](const auto& s) { return to_json(s); }, sample);
}

Sample sample_from_json(const Json& record) {
    if (!record.is_object()) throw ParseError("sample record must be an object");
    const auto it = record.find("scenario");
    if (it == record.end() || !it->is_string()) throw ParseError("sample record lacks 'scenario'");
    const auto scenario = it->get<std::string>();
    if (scenario == "single") return single_sample_from_json(record);
    if (scenario == "multi") return multi_sample_from_json(record);
    if (scenario == "error") return error_sample_from_json(record);
    throw ParseError("unknown scenario '" + scenario + "'");
}

std::string serialize_samples(const std::vector<Sample>& samples) {
    std::string out;
    for (const auto& s : samples) out += canonical_dump(to_json(s)) + "\n";
    return out;
}

namespace {

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        ++line_no;
        const std::string line = trim(text.substr(pos, end - pos));
        if (!line.empty()) fn(line, line_no);
        pos = end + 1;
    }
}

Json parse_line(const std::string& line, std::size_t line_no) {
    try {
        return Json::parse(line);
    } catch (const Json::exception& e) {
        throw ParseError(e.what(), line_no);
    }
}

} // namespace

std::vector<Sample> parse_samples(std::string_view text) {
    std::vector<Sample> out;
    for_each_line(text, [&](const std::string& line, std::size_t line_no) {
        const Json record = parse_line(line, line_no);
        try {
            out.push_back(sample_from_json(record));
        } catch (const ParseError& e) {
            throw ParseError(e.what(), line_no);
        }
    });
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("failed reading " + path.string());
    return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) throw IoError("failed writing " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

Json to_json(const SftRecord& record) {
    Json messages = Json::array();
    for (const auto& m : record.messages) messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    return {{"messages", std::move(messages)},
            {"meta",
             {{"scenario", record.meta.scenario}, {"tool_id", record.meta.tool_id}, {"sample_id", record.meta.sample_id}}}};
}

SftRecord sft_record_from_json(const Json& value) {
    try {
        SftRecord r;
        for (const auto& m : value.at("messages")) {
            const auto role = parse_role(m.at("role").get<std::string>());
            if (!role) throw ParseError("unknown role '" + m.at("role").get<std::string>() + "'");
            r.messages.push_back({*role, m.at("content").get<std::string>()});
        }
        const auto& meta = value.at("meta");
        r.meta = {meta.at("scenario").get<std::string>(), meta.at("tool_id").get<std::string>(),
                  meta.at("sample_id").get<std::string>()};
        if (r.messages.empty() || r.messages.back().role != Role::assistant) {
            throw ParseError("SFT record must end with an assistant message");
        }
        return r;
    } catch (const Json::exception& e) {
        throw ParseError(std::string("malformed SFT record: ") + e.what());
    }
}

namespace {

constexpr std::string_view kSimulatorInstructions =
    "You are a tool simulator. Given the tool specification below and a call, reply exactly as "
    "the real tool would. Valid calls get a JSON object with every response field; invalid "
    "calls get an error message naming the offending parameter.";

std::string output_text(const ToolOutput& output) {
    return output.kind == ToolOutput::Kind::text ? output.payload.get<std::string>() : canonical_dump(output.payload);
}

} // namespace

SftRecord make_sft_record(const Sample& sample, const ToolRegistry& tools) {
    if (!sample_passed(sample)) {
        throw ValidationError("sample " + sample_id(sample) + " failed validation");
    }
    const auto tool = tools.find(sample_tool_id(sample));
    if (!tool) throw PreconditionError("sample " + sample_id(sample) + ": unknown tool " + sample_tool_id(sample));

    SftRecord r;
    r.meta = {std::string(scenario_name(sample)), sample_tool_id(sample), sample_id(sample)};
    r.messages.push_back(
        {Role::system, std::string(kSimulatorInstructions) + "\n\nTOOL SPEC:\n" + canonical_serialize(*tool)});

    if (const auto* s = std::get_if<SingleTurnSample>(&sample)) {
        r.messages.push_back({Role::user, "ARGUMENTS:\n" + canonical_dump(s->input.arguments)});
        r.messages.push_back({Role::assistant, output_text(s->output)});
    } else if (const auto* m = std::get_if<MultiTurnSample>(&sample)) {
        auto prior = m->turns;
        if (!prior.empty()) {
            prior.back().tool_call.reset();
            prior.back().tool_result.reset();
        }
        r.messages.push_back({Role::user, "HISTORY:\n" + render_history(prior, prior.size()) +
                                              "\nARGUMENTS:\n" + canonical_dump(m->final_call.arguments)});
        r.messages.push_back({Role::assistant, output_text(m->final_output)});
    } else {
        const auto& e = std::get<ErrorSample>(sample);
        r.messages.push_back({Role::user, "ARGUMENTS:\n" + canonical_dump(e.corrupted_input.arguments)});
        r.messages.push_back({Role::assistant, e.message});
    }
    return r;
}

std::string render_sft(const std::vector<Sample>& samples, const ToolRegistry& tools) {
    std::vector<SftRecord> records;
    records.reserve(samples.size());
    for (const auto& s : samples) records.push_back(make_sft_record(s, tools));
    std::stable_sort(records.begin(), records.end(), [](const SftRecord& a, const SftRecord& b) {
        return std::tie(a.meta.scenario, a.meta.tool_id, a.meta.sample_id) <
               std::tie(b.meta.scenario, b.meta.tool_id, b.meta.sample_id);
    });
    std::string out;
    for (const auto& r : records) out += canonical_dump(to_json(r)) + "\n";
    return out;
}

std::size_t export_sft(const std::vector<Sample>& samples, const ToolRegistry& tools,
                       const std::filesystem::path& path) {
    write_file(path, render_sft(samples, tools));
    return samples.size();
}

MappingProfile MappingProfile::parse(std::string_view text) {
    MappingProfile p;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty() || value.empty()) throw ParseError("empty key or value", line_no);
        p.entries[key] = value;
    }
    return p;
}

MappingProfile MappingProfile::load(const std::filesystem::path& path) { return parse(read_file(path)); }

MappingProfile MappingProfile::native() {
    MappingProfile p;
    p.entries = {{"name", "api_name"},       {"description", "api_description"},
                 {"params", "parameters"},   {"required", "required"},
                 {"responses", "responses"}, {"field", "field"},
                 {"subfield", "subfield"}};
    return p;
}

std::optional<std::string> MappingProfile::get(std::string_view key) const {
    const auto it = entries.find(key);
    if (it == entries.end()) return std::nullopt;
    return it->second;
}

namespace {

const Json* at_path(const Json& record, std::string_view path) {
    const Json* cur = &record;
    std::size_t pos = 0;
    while (pos <= path.size()) {
        std::size_t dot = path.find('.', pos);
        if (dot == std::string_view::npos) dot = path.size();
        const std::string part(path.substr(pos, dot - pos));
        if (!cur->is_object()) return nullptr;
        const auto it = cur->find(part);
        if (it == cur->end()) return nullptr;
        cur = &*it;
        pos = dot + 1;
    }
    return cur;
}

std::optional<std::string> string_at(const Json& record, const std::optional<std::string>& path) {
    if (!path) return std::nullopt;
    const Json* v = at_path(record, *path);
    if (!v || !v->is_string()) return std::nullopt;
    return v->get<std::string>();
}

std::vector<ForeignField> read_fields(const Json& block, const MappingProfile& profile) {
    const std::string name_key = profile.get("param_name").value_or("name");
    const std::string type_key = profile.get("param_type").value_or("type");
    const std::string desc_key = profile.get("param_description").value_or("description");
    std::vector<ForeignField> out;
    auto read = [&](std::string name, const Json& entry) {
        ForeignField f{std::move(name), std::nullopt, {}};
        if (entry.is_object()) {
            if (const Json* t = at_path(entry, type_key); t && t->is_string()) f.type = t->get<std::string>();
            if (const Json* d = at_path(entry, desc_key); d && d->is_string()) f.description = d->get<std::string>();
        } else if (entry.is_string()) {
            f.type = entry.get<std::string>();
        }
        out.push_back(std::move(f));
    };
    const Json& fields = block.is_object() && block.contains("properties") && block["properties"].is_object()
                             ? block["properties"]
                             : block;
    if (fields.is_object()) {
        for (const auto& [name, entry] : fields.items()) read(name, entry);
    } else if (fields.is_array()) {
        for (const auto& entry : fields) {
            const Json* n = entry.is_object() ? at_path(entry, name_key) : nullptr;
            if (n && n->is_string()) read(n->get<std::string>(), entry);
        }
    }
    return out;
}

ForeignToolRecord extract(const Json& record, const MappingProfile& profile) {
    if (!record.is_object()) throw ParseError("record is not an object");
    ForeignToolRecord r;
    const auto name = string_at(record, profile.get("name"));
    if (!name || trim(*name).empty()) throw ParseError("missing name");
    const auto description = string_at(record, profile.get("description"));
    if (!description || trim(*description).empty()) throw ParseError("missing description");
    r.name = *name;
    r.description = *description;
    r.field = string_at(record, profile.get("field")).value_or("");
    r.subfield = string_at(record, profile.get("subfield"));

    const Json* params = at_path(record, *profile.get("params"));
    if (params) r.parameters = read_fields(*params, profile);
    const Json* required = profile.get("required") ? at_path(record, *profile.get("required")) : nullptr;
    if (!required && params && params->is_object() && params->contains("required")) required = &(*params)["required"];
    if (required) {
        if (!required->is_array()) throw ParseError("required is not a list");
        for (const auto& r_name : *required) {
            if (!r_name.is_string()) throw ParseError("required entries must be strings");
            r.required.push_back(r_name.get<std::string>());
        }
    }
    if (const auto path = profile.get("responses")) {
        if (const Json* responses = at_path(record, *path)) r.responses = read_fields(*responses, profile);
    }
    return r;
}

} // namespace

ForeignImport import_foreign_text(std::string_view text, const MappingProfile& profile) {
    for (const char* key : {"name", "description", "params"}) {
        if (!profile.get(key)) throw ValidationError(std::string("mapping profile lacks '") + key + "'");
    }
    ForeignImport out;
    std::vector<std::pair<std::size_t, Json>> records;
    const std::string body = trim(text);
    if (body.empty()) return out;

    bool whole = false;
    try {
        Json doc = Json::parse(body);
        whole = true;
        if (doc.is_array()) {
            for (std::size_t i = 0; i < doc.size(); ++i) records.emplace_back(i + 1, doc[i]);
        } else {
            records.emplace_back(1, std::move(doc));
        }
    } catch (const Json::exception&) {
    }
    if (!whole) {
        std::size_t n = 0;
        for_each_line(text, [&](const std::string& line, std::size_t line_no) {
            ++n;
            try {
                records.emplace_back(n, Json::parse(line));
            } catch (const Json::exception& e) {
                out.issues.push_back({n, "line " + std::to_string(line_no) + ": " + e.what()});
            }
        });
    }
    for (const auto& [index, record] : records) {
        try {
            out.records.push_back(extract(record, profile));
        } catch (const ParseError& e) {
            out.issues.push_back({index, e.what()});
        }
    }
    return out;
}

ForeignImport import_foreign(const std::filesystem::path& path, const MappingProfile& profile) {
    return import_foreign_text(read_file(path), profile);
}

Json to_json(const CorpusStats& stats) {
    Json histogram = Json::object();
    for (const auto& [k, v] : stats.parameter_histogram) histogram[std::to_string(k)] = v;
    return {{"count", stats.count}, {"scenarios", stats.scenarios}, {"fields", stats.fields},
            {"parameter_histogram", std::move(histogram)}};
}

CorpusStats corpus_stats_text(std::string_view text) {
    CorpusStats stats;
    stats.scenarios = {{"single", 0}, {"multi", 0}, {"error", 0}};
    for_each_line(text, [&](const std::string& line, std::size_t line_no) {
        const Json record = parse_line(line, line_no);
        if (!record.is_object()) throw ParseError("record is not an object", line_no);
        ++stats.count;
        if (const auto it = record.find("scenario"); it != record.end() && it->is_string()) {
            ++stats.scenarios[it->get<std::string>()];
        } else if (record.contains("api_name")) {
            ++stats.fields[record.value("field", std::string())];
            const auto params = record.find("parameters");
            ++stats.parameter_histogram[params != record.end() && params->is_object() ? params->size() : 0];
        } else {
            throw ParseError("record is neither a sample nor a tool spec", line_no);
        }
    });
    return stats;
}

CorpusStats corpus_stats(const std::filesystem::path& path) { return corpus_stats_text(read_file(path)); }

} // namespace toolweaver
