#include "toolweaver/tool_registry.hpp"

#include "toolweaver/errors.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <mutex>

namespace toolweaver {

bool Taxonomy::contains_field(std::string_view name) const { return find(name) != nullptr; }

const TaxonomyField* Taxonomy::find(std::string_view name) const {
    const std::string folded = to_lower_ascii(trim(name));
    for (const auto& f : fields) {
        if (to_lower_ascii(f.name) == folded) return &f;
    }
    return nullptr;
}

Json to_json(const Taxonomy& taxonomy) {
    Json fields = Json::array();
    for (const auto& f : taxonomy.fields) {
        fields.push_back({{"name", f.name},
                          {"provenance", f.seed ? "seed" : "generated"},
                          {"subfields", f.subfields}});
    }
    return {{"fields", std::move(fields)}};
}

Taxonomy taxonomy_from_json(const Json& value) {
    Taxonomy taxonomy;
    try {
        for (const auto& f : value.at("fields")) {
            TaxonomyField field;
            field.name = f.at("name").get<std::string>();
            field.seed = f.value("provenance", std::string("generated")) == "seed";
            field.subfields = f.value("subfields", std::vector<std::string>{});
            if (taxonomy.contains_field(field.name)) {
                throw ParseError("duplicate taxonomy field '" + field.name + "'");
            }
            taxonomy.fields.push_back(std::move(field));
        }
    } catch (const Json::exception& e) {
        throw ParseError(std::string("malformed taxonomy: ") + e.what());
    }
    return taxonomy;
}

std::string_view to_string(DedupKey key) { return key == DedupKey::name ? "name" : "description"; }

std::optional<DedupKey> parse_dedup_key(std::string_view text) {
    if (text == "name") return DedupKey::name;
    if (text == "description") return DedupKey::description;
    return std::nullopt;
}

DedupResult deduplicate(const std::vector<ToolSpec>& tools, Embedder& embedder, double threshold,
                        DedupKey key) {
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
        throw PreconditionError("dedup threshold must be within [0, 1]");
    }
    DedupResult result;
    if (tools.empty()) return result;

    std::vector<std::string> texts;
    texts.reserve(tools.size());
    for (const auto& t : tools) texts.push_back(key == DedupKey::name ? t.api_name : t.api_description);
    const auto vectors = embedder.embed(texts);

    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < tools.size(); ++i) {
        std::optional<std::size_t> best;
        double best_sim = -std::numeric_limits<double>::infinity();
        for (std::size_t k : kept) {
            const double sim = cosine(vectors[i], vectors[k]);
            if (sim > best_sim) {
                best_sim = sim;
                best = k;
            }
        }
        if (best && best_sim > threshold) {
            result.removed.push_back({tools[*best].id(), tools[i].id(), best_sim});
        } else {
            kept.push_back(i);
            result.kept.push_back(tools[i]);
        }
    }
    return result;
}

std::optional<TypeTag> normalize_type_name(std::string_view text) {
    const std::string t = to_lower_ascii(trim(text));
    if (auto tag = parse_type_tag(t)) return tag;
    if (t == "str" || t == "text") return TypeTag::string;
    if (t == "int" || t == "long") return TypeTag::integer;
    if (t == "float" || t == "double" || t == "decimal") return TypeTag::number;
    if (t == "bool") return TypeTag::boolean;
    if (t == "list" || t == "tuple") return TypeTag::array;
    if (t == "dict" || t == "map") return TypeTag::object;
    return std::nullopt;
}

Json to_json(const ForeignToolRecord& record) {
    auto fields = [](const std::vector<ForeignField>& fs) {
        Json out = Json::object();
        for (const auto& f : fs) {
            Json entry = {{"description", f.description}};
            if (f.type) entry["type"] = *f.type;
            out[f.name] = std::move(entry);
        }
        return out;
    };
    Json out = {{"api_name", record.name},
                {"api_description", record.description},
                {"field", record.field},
                {"parameters", fields(record.parameters)},
                {"required", record.required}};
    if (record.subfield) out["subfield"] = *record.subfield;
    if (record.responses) out["responses"] = fields(*record.responses);
    return out;
}

std::string overlap_text(const ToolSpec& tool) { return tool.api_name + " " + tool.api_description; }

OverlapReport corpus_overlap(const std::vector<ToolSpec>& corpus_a, const std::vector<ToolSpec>& corpus_b,
                             Embedder& embedder, double threshold) {
    if (corpus_a.empty() || corpus_b.empty()) throw PreconditionError("overlap needs two non-empty corpora");

    auto embed_all = [&](const std::vector<ToolSpec>& corpus) {
        std::vector<std::string> texts;
        texts.reserve(corpus.size());
        for (const auto& t : corpus) texts.push_back(overlap_text(t));
        return embedder.embed(texts);
    };
    const auto ea = embed_all(corpus_a);
    const auto eb = embed_all(corpus_b);

    OverlapReport report;
    std::vector<double> best_b(eb.size(), -std::numeric_limits<double>::infinity());
    std::size_t matched_a = 0;
    for (std::size_t i = 0; i < ea.size(); ++i) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t j = 0; j < eb.size(); ++j) {
            const double sim = cosine(ea[i], eb[j]);
            if (sim > best) {
                best = sim;
                arg = j;
            }
            best_b[j] = std::max(best_b[j], sim);
        }
        if (best > threshold) {
            ++matched_a;
            report.pairs.push_back({corpus_a[i].id(), corpus_b[arg].id(), best});
        }
    }
    const auto matched_b = std::count_if(best_b.begin(), best_b.end(), [&](double s) { return s > threshold; });
    report.fraction_a_matched = static_cast<double>(matched_a) / static_cast<double>(ea.size());
    report.fraction_b_matched = static_cast<double>(matched_b) / static_cast<double>(eb.size());

    for (std::size_t i = 0; i < ea.size(); ++i) report.coordinates.push_back({corpus_a[i].id(), "a", ea[i]});
    for (std::size_t j = 0; j < eb.size(); ++j) report.coordinates.push_back({corpus_b[j].id(), "b", eb[j]});
    return report;
}

void write_overlap_csv(const OverlapReport& report, std::ostream& out) {
    const std::size_t dim = report.coordinates.empty() ? 0 : report.coordinates.front().vector.dim();
    out << "id,corpus";
    for (std::size_t d = 0; d < dim; ++d) out << ",dim_" << d;
    out << '\n';
    const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
    for (const auto& row : report.coordinates) {
        out << row.id << ',' << row.corpus;
        for (double v : row.vector.values()) out << ',' << v;
        out << '\n';
    }
    out.precision(old_precision);
}

ToolRegistry::ToolRegistry(const std::vector<ToolSpec>& tools) {
    for (const auto& t : tools) add(t);
}

std::string ToolRegistry::add(ToolSpec spec) {
    const auto verdict = validate_tool_spec(spec);
    if (!verdict.passed()) throw ValidationError("invalid tool spec: " + verdict.reasons.front());
    std::string id = spec.id();
    std::unique_lock lock(mutex_);
    tools_.insert_or_assign(id, std::move(spec));
    return id;
}

std::optional<ToolSpec> ToolRegistry::find(std::string_view id) const {
    std::shared_lock lock(mutex_);
    const auto it = tools_.find(id);
    if (it == tools_.end()) return std::nullopt;
    return it->second;
}

std::vector<ToolSpec> ToolRegistry::list() const {
    std::shared_lock lock(mutex_);
    std::vector<ToolSpec> out;
    out.reserve(tools_.size());
    for (const auto& [_, t] : tools_) out.push_back(t);
    return out;
}

std::size_t ToolRegistry::size() const {
    std::shared_lock lock(mutex_);
    return tools_.size();
}

} // namespace toolweaver
