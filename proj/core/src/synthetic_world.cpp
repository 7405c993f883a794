#include "toolweaver/synthetic_world.hpp"

#include "toolweaver/json_util.hpp"
#include "toolweaver/tool_spec.hpp"

#include <array>
#include <cctype>
#include <set>
#include <sstream>

namespace toolweaver {

namespace {

constexpr std::array<const char*, 40> kFields{
    "weather",        "finance",        "travel",        "healthcare",     "education",
    "e-commerce",     "entertainment",  "sports",        "food and dining", "real estate",
    "transportation", "social media",   "news",          "music",          "gaming",
    "agriculture",    "energy",         "logistics",     "legal services", "human resources",
    "cybersecurity",  "astronomy",      "fitness",       "automotive",     "insurance",
    "telecommunications", "marketing",  "manufacturing", "public sector",  "environment",
    "photography",    "pet care",       "fashion",       "home automation", "translation",
    "mapping",        "cryptocurrency", "scientific research", "publishing", "event planning"};

constexpr std::array<const char*, 10> kSubfieldAspects{
    "analytics", "search",    "scheduling", "reporting", "recommendations",
    "monitoring", "booking",  "pricing",    "inventory", "alerts"};

constexpr std::array<const char*, 16> kVerbs{"get", "search", "list", "create", "estimate", "compare",
                                             "track", "book", "cancel", "summarize", "validate", "convert",
                                             "forecast", "rank", "schedule", "lookup"};

constexpr std::array<const char*, 48> kNouns{
    "invoice",   "ticket",    "forecast", "route",     "appointment", "playlist", "recipe",    "listing",
    "shipment",  "contract",  "vacancy",  "firewall",  "telescope",   "workout",  "vehicle",   "policy",
    "campaign",  "machine",   "permit",   "emission",  "photo",       "pet",      "outfit",    "thermostat",
    "phrase",    "landmark",  "wallet",   "dataset",   "manuscript",  "venue",    "tide",      "harvest",
    "tariff",    "warehouse", "lawsuit",  "candidate", "vulnerability", "comet",  "league",    "course",
    "symptom",   "portfolio", "flight",   "hotel",     "concert",     "article",  "podcast",   "quiz"};

struct ParamTemplate {
    const char* name;
    TypeTag type;
    const char* description;
};

constexpr std::array<ParamTemplate, 14> kParams{{
    {"city", TypeTag::string, "City name, e.g. Paris"},
    {"query", TypeTag::string, "Free-text search query"},
    {"start_date", TypeTag::string, "Start date in YYYY-MM-DD format"},
    {"end_date", TypeTag::string, "End date in YYYY-MM-DD format"},
    {"units", TypeTag::string, "Measurement units: metric or imperial"},
    {"user_id", TypeTag::string, "Identifier of the requesting user"},
    {"limit", TypeTag::integer, "Maximum number of results"},
    {"page", TypeTag::integer, "Result page, starting at 1"},
    {"max_price", TypeTag::number, "Upper price bound in USD"},
    {"latitude", TypeTag::number, "Latitude in decimal degrees"},
    {"include_details", TypeTag::boolean, "Whether to include extended details"},
    {"tags", TypeTag::array, "List of tags to filter by"},
    {"filters", TypeTag::object, "Additional key-value filters"},
    {"language", TypeTag::string, "Two-letter language code"},
}};

constexpr std::array<ParamTemplate, 8> kResponses{{
    {"status", TypeTag::string, "Outcome of the request"},
    {"results", TypeTag::array, "Matching items"},
    {"total", TypeTag::integer, "Number of matching items"},
    {"score", TypeTag::number, "Relevance or quality score"},
    {"summary", TypeTag::string, "Human-readable summary"},
    {"available", TypeTag::boolean, "Whether the item is available"},
    {"details", TypeTag::object, "Structured details"},
    {"updated_at", TypeTag::string, "Timestamp of the data"},
}};

constexpr std::array<const char*, 8> kCities{"Paris", "Tokyo", "Nairobi", "Lima", "Oslo", "Toronto", "Hanoi", "Cairo"};

std::string line_after(std::string_view text, std::string_view marker) {
    const auto pos = text.find(marker);
    if (pos == std::string_view::npos) return {};
    const auto start = pos + marker.size();
    const auto end = text.find('\n', start);
    return trim(text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
}

std::optional<Json> record_after(std::string_view text, std::string_view marker) {
    const auto pos = text.find(marker);
    if (pos == std::string_view::npos) return std::nullopt;
    const auto rest = text.substr(pos + marker.size());
    // A literal "none" right after the marker means no record.
    if (trim(rest.substr(0, rest.find('\n'))) == "none") return std::nullopt;
    return extract_first_record(rest);
}

std::size_t number_after(std::string_view text, std::string_view marker, std::size_t fallback) {
    const std::string v = line_after(text, marker);
    try {
        return v.empty() ? fallback : static_cast<std::size_t>(std::stoul(v));
    } catch (const std::exception&) {
        return fallback;
    }
}

std::string snake(std::string_view text) {
    std::string out;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!out.empty() && out.back() != '_') {
            out.push_back('_');
        }
    }
    while (!out.empty() && out.back() == '_') out.pop_back();
    return out;
}

Json example_value(const std::string& name, TypeTag type, std::uint64_t k) {
    switch (type) {
    case TypeTag::string:
        if (name.find("city") != std::string::npos) return kCities[k % kCities.size()];
        if (name.find("date") != std::string::npos) {
            const int day = static_cast<int>(k % 20) + 1 + (name.find("end") != std::string::npos ? 7 : 0);
            return "2024-05-" + std::string(day < 10 ? "0" : "") + std::to_string(day);
        }
        if (name == "units") return k % 2 ? "imperial" : "metric";
        if (name == "language") return k % 2 ? "fr" : "en";
        if (name == "status") return "success";
        return name + " " + std::to_string(k % 97 + 1);
    case TypeTag::integer: return static_cast<std::int64_t>(k % 50 + 1);
    case TypeTag::number: return static_cast<double>(k % 400 + 10) / 4.0;
    case TypeTag::boolean: return k % 2 == 0;
    case TypeTag::array: return Json::array({name + "_a", name + "_b"});
    case TypeTag::object: return Json{{"key", name + "_" + std::to_string(k % 10)}};
    }
    return nullptr;
}

// Parameters and response fields of a spec record as (name, type) pairs.
std::vector<std::pair<std::string, TypeTag>> typed_fields(const Json& spec, const char* key) {
    std::vector<std::pair<std::string, TypeTag>> out;
    const auto it = spec.find(key);
    if (it == spec.end() || !it->is_object()) return out;
    for (const auto& [name, entry] : it->items()) {
        TypeTag t = TypeTag::string;
        if (entry.is_object() && entry.contains("type") && entry["type"].is_string()) {
            if (auto parsed = parse_type_tag(entry["type"].get<std::string>())) t = *parsed;
        }
        out.emplace_back(name, t);
    }
    return out;
}

bool is_required(const Json& spec, const std::string& name) {
    const auto it = spec.find("required");
    if (it == spec.end() || !it->is_array()) return false;
    for (const auto& r : *it) {
        if (r.is_string() && r.get<std::string>() == name) return true;
    }
    return false;
}

Json example_arguments(const Json& spec, std::uint64_t k, const Json& context = Json::object()) {
    Json args = Json::object();
    std::uint64_t j = 0;
    for (const auto& [name, type] : typed_fields(spec, "parameters")) {
        ++j;
        if (!is_required(spec, name) && (k + j) % 2 == 1) continue;
        if (context.contains(name) && type_matches(type, context[name])) {
            args[name] = context[name];
        } else {
            args[name] = example_value(name, type, k + j);
        }
    }
    return args;
}

Json example_output(const Json& spec, std::uint64_t k, const std::optional<std::string>& hint = std::nullopt) {
    Json out = Json::object();
    bool hint_used = false;
    std::uint64_t j = 0;
    for (const auto& [name, type] : typed_fields(spec, "responses")) {
        if (hint && !hint_used && type == TypeTag::string) {
            out[name] = *hint;
            hint_used = true;
            continue;
        }
        out[name] = example_value(name, type, k + ++j);
    }
    return out;
}

std::string reply_taxonomy_field(std::string_view user) {
    std::set<std::string> existing;
    std::istringstream in(line_after(user, "EXISTING FIELDS:"));
    for (std::string part; std::getline(in, part, ',');) existing.insert(to_lower_ascii(trim(part)));
    const std::uint64_t h = fnv1a64(line_after(user, "Request #"));
    for (std::size_t i = 0; i < kFields.size(); ++i) {
        const char* f = kFields[(h + i) % kFields.size()];
        if (!existing.count(f)) return f;
    }
    for (std::size_t n = 1;; ++n) {
        std::string f = "domain " + std::to_string(n);
        if (!existing.count(f)) return f;
    }
}

std::string reply_subfields(std::string_view user) {
    const std::string field = line_after(user, "FIELD:");
    const std::size_t count = number_after(user, "COUNT:", 3);
    const std::size_t request = number_after(user, "Request #", 1);
    std::string out;
    for (std::size_t i = 0; i < count; ++i) {
        out += field + " " + kSubfieldAspects[((request - 1) * count + i) % kSubfieldAspects.size()] + "\n";
    }
    return out;
}

std::string reply_tools(std::string_view user) {
    const std::string field = line_after(user, "FIELD:");
    const std::string subfield = line_after(user, "SUBFIELD:");
    const std::size_t count = number_after(user, "COUNT:", 1);
    const std::size_t request = number_after(user, "Request #", 1);
    const std::uint64_t h = fnv1a64(field + "/" + subfield);
    Json tools = Json::array();
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint64_t k = h + (request - 1) * 7 + i * 13;
        const std::string verb = kVerbs[((h >> 8) + i) % kVerbs.size()];
        const std::string noun = kNouns[(k >> 3) % kNouns.size()];
        const std::string name = verb + "_" + noun + "_" + snake(subfield);
        Json params = Json::object();
        std::vector<std::string> names;
        const std::size_t nparams = 1 + k % 4;
        for (std::size_t p = 0; p < nparams; ++p) {
            const auto& t = kParams[(k + p * 5) % kParams.size()];
            if (params.contains(t.name)) continue;
            params[t.name] = {{"type", std::string(to_string(t.type))}, {"description", t.description}};
            names.emplace_back(t.name);
        }
        Json responses = Json::object();
        const std::size_t nresp = 1 + (k >> 4) % 3;
        for (std::size_t r = 0; r < nresp; ++r) {
            const auto& t = kResponses[(k + r * 3) % kResponses.size()];
            responses[t.name] = {{"type", std::string(to_string(t.type))}, {"description", t.description}};
        }
        Json required = Json::array();
        for (std::size_t r = 0; r < names.size() && r < 2; ++r) required.push_back(names[r]);
        tools.push_back({{"api_name", name},
                         {"api_description", "Provides " + noun + " " + verb + " operations for " + subfield + " (" +
                                                 field + ")."},
                         {"field", field},
                         {"subfield", subfield},
                         {"parameters", std::move(params)},
                         {"required", std::move(required)},
                         {"responses", std::move(responses)}});
    }
    return tools.dump(2);
}

TypeTag guess_type(const std::string& name) {
    if (name.find("date") != std::string::npos || name.find("name") != std::string::npos) return TypeTag::string;
    if (name.find("count") != std::string::npos || name.find("limit") != std::string::npos ||
        name.find("num") != std::string::npos || name == "page") {
        return TypeTag::integer;
    }
    if (name.find("price") != std::string::npos || name.find("lat") != std::string::npos ||
        name.find("lon") != std::string::npos || name.find("amount") != std::string::npos) {
        return TypeTag::number;
    }
    if (name.rfind("is_", 0) == 0 || name.rfind("include", 0) == 0 || name.rfind("has_", 0) == 0) {
        return TypeTag::boolean;
    }
    if (name.find("list") != std::string::npos || name.find("tags") != std::string::npos) return TypeTag::array;
    return TypeTag::string;
}

std::string reply_complete(std::string_view user) {
    auto record = record_after(user, "PARTIAL RECORD:");
    if (!record) return "I could not read the record.";
    Json& r = *record;
    if (r.contains("parameters") && r["parameters"].is_object()) {
        for (auto& [name, entry] : r["parameters"].items()) {
            if (!entry.is_object()) entry = Json::object();
            if (!entry.contains("type")) entry["type"] = std::string(to_string(guess_type(name)));
        }
    }
    if (!r.contains("responses") || !r["responses"].is_object() || r["responses"].empty()) {
        r["responses"] = {{"result", {{"type", "string"}, {"description", "Result of the call"}}}};
    } else {
        for (auto& [name, entry] : r["responses"].items()) {
            if (!entry.is_object()) entry = Json::object();
            if (!entry.contains("type")) entry["type"] = std::string(to_string(guess_type(name)));
        }
    }
    return r.dump(2);
}

std::string reply_single(std::string_view user) {
    const auto spec = record_after(user, "TOOL SPEC:");
    if (!spec) return "No tool spec given.";
    const std::size_t count = number_after(user, "COUNT:", 1);
    const std::uint64_t h = fnv1a64(line_after(user, "Request #")) ^ fnv1a64(spec->value("api_name", ""));
    Json examples = Json::array();
    for (std::size_t i = 0; i < count; ++i) {
        examples.push_back({{"input", example_arguments(*spec, h + i * 31)}, {"output", example_output(*spec, h + i)}});
    }
    return examples.dump(2);
}

std::string reply_turn(std::string_view user) {
    const std::size_t turn = number_after(user, "TURN:", 1);
    const auto spec = record_after(user, "TOOL SPEC:");
    const Json context = record_after(user, "CONTEXT:").value_or(Json::object());
    const std::uint64_t h = fnv1a64(user);
    Json reply = {{"context_update", {{"turn_" + std::to_string(turn) + "_topic", "step " + std::to_string(turn)}}}};
    if (spec) {
        const std::string name = spec->value("api_name", "the tool");
        const Json args = example_arguments(*spec, h, context);
        reply["user"] = "Could you help me with " + name + "?";
        reply["assistant"] = "Sure, I will use " + name + " for that.";
        reply["tool_call"] = args;
        reply["tool_result"] = example_output(*spec, h);
        for (const auto& [k, v] : args.items()) reply["context_update"][k] = v;
    } else {
        reply["user"] = "I am planning something and need some information first.";
        reply["assistant"] = "Happy to help. Tell me what you need.";
        reply["tool_call"] = nullptr;
        reply["tool_result"] = nullptr;
        reply["context_update"]["city"] = kCities[h % kCities.size()];
    }
    return reply.dump(2);
}

std::string reply_final(std::string_view user) {
    const auto spec = record_after(user, "TOOL SPEC:");
    if (!spec) return "No tool spec given.";
    const Json context = record_after(user, "CONTEXT:").value_or(Json::object());
    const std::uint64_t h = fnv1a64(user);
    return Json{{"arguments", example_arguments(*spec, h, context)}, {"output", example_output(*spec, h)}}.dump(2);
}

std::string reply_invalid_value(std::string_view user) {
    const std::string type = line_after(user, "TYPE:");
    const std::string current = line_after(user, "CURRENT VALUE:");
    if (type == "integer") return current == "-999999" ? R"({"value": -1})" : R"({"value": -999999})";
    if (type == "number") return current == "-1000000000.0" ? R"({"value": -1.5})" : R"({"value": -1000000000.0})";
    return current == "\"potato\"" ? R"({"value": "banana"})" : R"({"value": "potato"})";
}

std::string reply_error_message(std::string_view user) {
    std::string problem = line_after(user, "PROBLEM:");
    if (problem.empty()) problem = "the call is invalid";
    return "Error: " + problem + ". Correct this parameter and retry the call.";
}

std::string reply_simulate(std::string_view user) {
    const auto spec = record_after(user, "TOOL SPEC:");
    if (!spec) return "{}";
    const auto args = record_after(user, "ARGUMENTS:");
    const std::string hint = line_after(user, "HINT:");
    const std::uint64_t h = fnv1a64(args ? canonical_dump(*args) : std::string());
    return example_output(*spec, h, hint.empty() || hint == "none" ? std::nullopt : std::optional(hint)).dump();
}

} // namespace

MockResponder synthetic_world_responder() {
    return [](const GenerationRequest& request) -> std::string {
        const std::string_view tag = request.tag;
        const std::string_view user = request.last_user_content();
        if (tag.rfind("judge.", 0) == 0) return "PASS";
        if (tag == tags::taxonomy_field) return reply_taxonomy_field(user);
        if (tag == tags::taxonomy_subfield) return reply_subfields(user);
        if (tag == tags::tools_generate) return reply_tools(user);
        if (tag == tags::tools_complete) return reply_complete(user);
        if (tag == tags::single_generate) return reply_single(user);
        if (tag == tags::multi_turn) return reply_turn(user);
        if (tag == tags::multi_final) return reply_final(user);
        if (tag == tags::error_invalid_value) return reply_invalid_value(user);
        if (tag == tags::error_message) return reply_error_message(user);
        if (tag == tags::simulate) return reply_simulate(user);
        return "OK";
    };
}

} // namespace toolweaver
