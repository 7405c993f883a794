#pragma once

#include <toolweaver/embedding.hpp>
#include <toolweaver/mock_backend.hpp>
#include <toolweaver/rng.hpp>
#include <toolweaver/synthetic_world.hpp>
#include <toolweaver/tool_spec.hpp>

#include <algorithm>
#include <memory>
#include <string>
#include <vector>

namespace tw_test {

using toolweaver::Json;
using toolweaver::Rng;
using toolweaver::ToolSpec;
using toolweaver::TypeTag;

inline constexpr TypeTag kTags[] = {TypeTag::string, TypeTag::integer, TypeTag::number,
                                    TypeTag::boolean, TypeTag::array, TypeTag::object};

inline std::string random_word(Rng& rng, std::size_t min_len = 3, std::size_t max_len = 9) {
    static constexpr char kAlphabet[] = "abcdefghijklmnopqrstuvwxyz";
    const std::size_t len = min_len + rng.uniform_index(max_len - min_len + 1);
    std::string w;
    for (std::size_t i = 0; i < len; ++i) w += kAlphabet[rng.uniform_index(26)];
    return w;
}

inline TypeTag random_tag(Rng& rng) { return kTags[rng.uniform_index(6)]; }

/// Valid spec with 1..max_params parameters (at least one required when `need_required`) and
/// 0..3 response fields.
inline ToolSpec random_spec(Rng& rng, std::size_t max_params = 5, bool need_required = false) {
    ToolSpec s;
    s.api_name = random_word(rng) + "_" + random_word(rng);
    s.api_description = "Returns " + random_word(rng) + " for a " + random_word(rng);
    s.field = random_word(rng);
    if (rng.uniform_index(2) == 0) s.subfield = random_word(rng);
    const std::size_t n = 1 + rng.uniform_index(max_params);
    for (std::size_t i = 0; i < n; ++i) {
        const std::string name = "p" + std::to_string(i) + "_" + random_word(rng, 2, 5);
        s.parameters[name] = {name, random_tag(rng), "the " + random_word(rng)};
        if (rng.uniform_index(2) == 0) s.required.push_back(name);
    }
    if (need_required && s.required.empty()) s.required.push_back(s.parameters.begin()->first);
    const std::size_t r = rng.uniform_index(4);
    for (std::size_t i = 0; i < r; ++i) {
        const std::string name = "r" + std::to_string(i) + "_" + random_word(rng, 2, 5);
        s.responses[name] = {name, random_tag(rng), "the " + random_word(rng)};
    }
    return s;
}

inline Json random_value(Rng& rng, TypeTag tag) {
    switch (tag) {
    case TypeTag::string: return random_word(rng);
    case TypeTag::integer: return static_cast<std::int64_t>(rng.uniform_index(2000)) - 1000;
    case TypeTag::number: return rng.uniform_real() * 100.0 + 0.5;
    case TypeTag::boolean: return rng.uniform_index(2) == 0;
    case TypeTag::array: return Json::array({random_word(rng), random_word(rng)});
    case TypeTag::object: return Json{{"k", random_word(rng)}};
    }
    return nullptr;
}

/// Type-correct arguments: every required parameter plus a random subset of optional ones.
inline Json random_valid_arguments(Rng& rng, const ToolSpec& spec) {
    Json args = Json::object();
    for (const auto& [name, p] : spec.parameters) {
        const bool required =
            std::find(spec.required.begin(), spec.required.end(), name) != spec.required.end();
        if (required || rng.uniform_index(2) == 0) args[name] = random_value(rng, p.type);
    }
    return args;
}

/// Mock that answers every shipped prompt through the synthetic world.
inline std::shared_ptr<toolweaver::MockBackend> world_mock() {
    auto mock = std::make_shared<toolweaver::MockBackend>();
    mock->set_fallback(toolweaver::synthetic_world_responder());
    return mock;
}

inline ToolSpec weather_tool() {
    ToolSpec s;
    s.api_name = "get_weather";
    s.api_description = "Current weather conditions for a city";
    s.field = "weather";
    s.subfield = "forecasting";
    s.parameters["city"] = {"city", TypeTag::string, "city name"};
    s.parameters["units"] = {"units", TypeTag::string, "metric or imperial"};
    s.parameters["days"] = {"days", TypeTag::integer, "forecast horizon"};
    s.required = {"city"};
    s.responses["temperature"] = {"temperature", TypeTag::number, "degrees"};
    s.responses["condition"] = {"condition", TypeTag::string, "sky condition"};
    return s;
}

/// Brute-force first-survivor dedup: tool i survives iff no earlier survivor j has
/// cos(i, j) > threshold. Returns surviving indices.
inline std::vector<std::size_t> dedup_oracle(const std::vector<toolweaver::EmbeddingVector>& v,
                                             double threshold) {
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < v.size(); ++i) {
        bool dup = false;
        for (std::size_t j : kept) {
            double dot = 0.0;
            for (std::size_t d = 0; d < v[i].dim(); ++d) dot += v[i][d] * v[j][d];
            if (dot > threshold) dup = true;
        }
        if (!dup) kept.push_back(i);
    }
    return kept;
}

} // namespace tw_test
