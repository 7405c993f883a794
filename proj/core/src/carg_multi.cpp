#include "toolweaver/carg_multi.hpp"

#include "toolweaver/carg_single.hpp"
#include "toolweaver/errors.hpp"
#include "toolweaver/parallel.hpp"
#include "toolweaver/rng.hpp"

#include <algorithm>
#include <limits>

namespace toolweaver {

std::string association_text(const ToolSpec& tool) {
    return tool.api_name + " " + tool.api_description + " " + tool.field;
}

EmbeddingMap embed_tools(const std::vector<ToolSpec>& tools, Embedder& embedder) {
    EmbeddingMap out;
    if (tools.empty()) return out;
    std::vector<std::string> texts;
    texts.reserve(tools.size());
    for (const auto& t : tools) texts.push_back(association_text(t));
    auto vectors = embedder.embed(texts);
    for (std::size_t i = 0; i < tools.size(); ++i) out.insert_or_assign(tools[i].id(), std::move(vectors[i]));
    return out;
}

namespace {

const EmbeddingVector& lookup(const EmbeddingMap& embeddings, const std::string& id) {
    const auto it = embeddings.find(id);
    if (it == embeddings.end()) throw PreconditionError("no embedding for tool '" + id + "'");
    return it->second;
}

} // namespace

double coherence(const std::vector<std::string>& member_ids, const EmbeddingMap& embeddings) {
    if (member_ids.empty()) throw PreconditionError("coherence of an empty group");
    double sum = 0.0;
    for (const auto& a : member_ids) {
        const auto& ea = lookup(embeddings, a);
        for (const auto& b : member_ids) sum += cosine(ea, lookup(embeddings, b));
    }
    const auto n = static_cast<double>(member_ids.size());
    return sum / (n * n);
}

ToolGroup build_group(const std::string& seed_id, const EmbeddingMap& embeddings, double theta,
                      std::size_t max_size) {
    if (!(theta > -1.0 && theta < 1.0)) throw PreconditionError("theta must lie in (-1, 1)");
    if (max_size == 0) throw PreconditionError("max group size must be at least 1");
    lookup(embeddings, seed_id);

    ToolGroup group;
    group.member_ids.push_back(seed_id);
    while (group.member_ids.size() < max_size) {
        const std::string* best_id = nullptr;
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& [id, vec] : embeddings) {
            if (std::find(group.member_ids.begin(), group.member_ids.end(), id) != group.member_ids.end()) continue;
            double link = -std::numeric_limits<double>::infinity();
            for (const auto& m : group.member_ids) link = std::max(link, cosine(vec, embeddings.find(m)->second));
            if (link > best) {
                best = link;
                best_id = &id;
            }
        }
        if (!best_id || !(best > theta)) break;
        group.member_ids.push_back(*best_id);
    }
    group.coherence = coherence(group.member_ids, embeddings);
    return group;
}

namespace {

Json call_json(const std::optional<ToolCallInput>& call) {
    if (!call) return nullptr;
    return {{"tool_id", call->tool_id}, {"arguments", call->arguments}};
}

ToolCallInput call_from_json(const Json& value) {
    ToolCallInput call{value.at("tool_id").get<std::string>(), value.at("arguments")};
    if (!call.arguments.is_object()) throw ParseError("tool call arguments must be an object");
    return call;
}

Json group_json(const ToolGroup& group) {
    return {{"member_ids", group.member_ids},
            {"seed_id", group.seed_id()},
            {"target_id", group.target_id()},
            {"coherence", group.coherence}};
}

} // namespace

Json to_json(const MultiTurnSample& sample) {
    Json turns = Json::array();
    for (const auto& t : sample.turns) {
        turns.push_back({{"index", t.index},
                         {"user", t.user_utterance},
                         {"assistant", t.assistant_content},
                         {"tool_call", call_json(t.tool_call)},
                         {"tool_result", t.tool_result ? t.tool_result->to_json() : Json(nullptr)},
                         {"context_update", t.context_update}});
    }
    return {{"sample_id", sample.sample_id},
            {"scenario", "multi"},
            {"tool_id", sample.target_id()},
            {"group", group_json(sample.group)},
            {"turns", std::move(turns)},
            {"final_call", call_json(sample.final_call)},
            {"final_output", sample.final_output.to_json()},
            {"verdict", {{"call", to_json(sample.verdict.call)}, {"coherence", to_json(sample.verdict.coherence)}}},
            {"coherence", sample.group.coherence}};
}

MultiTurnSample multi_sample_from_json(const Json& record) {
    try {
        if (record.value("scenario", std::string("multi")) != "multi") {
            throw ParseError("record is not a multi-turn sample");
        }
        MultiTurnSample s;
        s.sample_id = record.at("sample_id").get<std::string>();
        const auto& g = record.at("group");
        s.group.member_ids = g.at("member_ids").get<std::vector<std::string>>();
        if (s.group.member_ids.empty()) throw ParseError("group has no members");
        s.group.coherence = g.value("coherence", record.value("coherence", 1.0));
        for (const auto& t : record.at("turns")) {
            DialogueTurn turn;
            turn.index = t.at("index").get<std::size_t>();
            turn.user_utterance = t.value("user", std::string());
            turn.assistant_content = t.value("assistant", std::string());
            if (const auto& c = t.at("tool_call"); !c.is_null()) turn.tool_call = call_from_json(c);
            if (const auto& r = t.at("tool_result"); !r.is_null()) turn.tool_result = ToolOutput::from_json(r);
            turn.context_update = t.value("context_update", Json::object());
            s.turns.push_back(std::move(turn));
        }
        s.final_call = call_from_json(record.at("final_call"));
        s.final_output = ToolOutput::from_json(record.at("final_output"));
        const auto& v = record.at("verdict");
        s.verdict.call = verdict_from_json(v.at("call"));
        s.verdict.coherence = check_from_json(v.at("coherence"));
        return s;
    } catch (const Json::exception& e) {
        throw ParseError(std::string("malformed multi-turn sample: ") + e.what());
    }
}

Json accumulated_context(const std::vector<DialogueTurn>& turns, std::size_t t) {
    Json context = Json::object();
    for (std::size_t i = 0; i + 1 < t && i < turns.size(); ++i) {
        for (const auto& [key, value] : turns[i].context_update.items()) context[key] = value;
    }
    return context;
}

std::string render_history(const std::vector<DialogueTurn>& turns, std::size_t upto) {
    std::string out;
    for (std::size_t i = 0; i < upto && i < turns.size(); ++i) {
        const auto& t = turns[i];
        out += "Turn " + std::to_string(t.index) + "\n";
        out += "User: " + t.user_utterance + "\n";
        out += "Assistant: " + t.assistant_content + "\n";
        if (t.tool_call) out += "Tool call (" + t.tool_call->tool_id + "): " + t.tool_call->arguments.dump() + "\n";
        if (t.tool_result) out += "Tool result: " + t.tool_result->to_json().dump() + "\n";
    }
    return out.empty() ? "(none)" : out;
}

std::optional<std::size_t> assigned_member(std::size_t turn, std::size_t turns, std::size_t members) {
    if (turn == 0 || turn > turns || members > turns) return std::nullopt;
    const std::size_t first = turns - members + 1;
    if (turn < first) return std::nullopt;
    return turn - first;
}

namespace {

std::optional<DialogueTurn> parse_turn(std::string_view text, std::size_t index,
                                       const std::optional<std::string>& tool_id) {
    const auto parsed = extract_first_record(text);
    if (!parsed) return std::nullopt;
    const auto& j = *parsed;
    if (!j.contains("user") || !j["user"].is_string() || !j.contains("assistant") || !j["assistant"].is_string()) {
        return std::nullopt;
    }
    DialogueTurn turn;
    turn.index = index;
    turn.user_utterance = j["user"].get<std::string>();
    turn.assistant_content = j["assistant"].get<std::string>();
    if (auto c = j.find("context_update"); c != j.end() && c->is_object()) turn.context_update = *c;
    if (tool_id) {
        if (auto c = j.find("tool_call"); c != j.end() && c->is_object()) turn.tool_call = ToolCallInput{*tool_id, *c};
        if (auto r = j.find("tool_result"); r != j.end() && (r->is_object() || r->is_string())) {
            turn.tool_result = ToolOutput::from_json(*r);
        }
    }
    return turn;
}

} // namespace

MultiTurnSample generate_dialogue(const ToolGroup& group, const std::map<std::string, ToolSpec, std::less<>>& tools,
                                  std::size_t turns, Backend& backend, std::uint64_t rng_seed,
                                  const PromptTemplates& prompts) {
    const std::size_t k = group.member_ids.size();
    if (k == 0 || k > turns) throw PreconditionError("dialogue needs 1 <= group size <= turns");
    if (turns > kMaxTurns) throw PreconditionError("at most " + std::to_string(kMaxTurns) + " turns");
    auto spec_of = [&](const std::string& id) -> const ToolSpec& {
        const auto it = tools.find(id);
        if (it == tools.end()) throw PreconditionError("unknown group member '" + id + "'");
        return it->second;
    };
    for (const auto& id : group.member_ids) spec_of(id);

    MultiTurnSample sample;
    sample.group = group;
    for (std::size_t t = 1; t <= turns; ++t) {
        const auto member = assigned_member(t, turns, k);
        std::optional<std::string> tool_id;
        std::string spec_text = "none";
        if (member) {
            tool_id = group.member_ids[*member];
            spec_text = to_json(spec_of(*tool_id)).dump(2);
        }
        // The target's call is produced by the final step from the complete history.
        if (t == turns) tool_id.reset();

        std::optional<DialogueTurn> turn;
        for (std::size_t attempt = 1; attempt <= 2 && !turn; ++attempt) {
            const auto reply = backend.generate(prompts.request(
                "multi_turn", tags::multi_turn,
                {{"turn", std::to_string(t)},
                 {"turns", std::to_string(turns)},
                 {"history", render_history(sample.turns, sample.turns.size())},
                 {"context", accumulated_context(sample.turns, t).dump(2)},
                 {"tool_spec", spec_text},
                 {"request", std::to_string(attempt)},
                 {"seed", std::to_string(rng_seed)}}));
            turn = parse_turn(reply.text, t, tool_id);
        }
        if (!turn) throw GenerationError("turn " + std::to_string(t) + " unparseable after one re-ask");
        sample.turns.push_back(std::move(*turn));
    }

    const ToolSpec& target = spec_of(group.target_id());
    std::optional<Json> final;
    for (std::size_t attempt = 1; attempt <= 2 && !final; ++attempt) {
        const auto reply = backend.generate(prompts.request(
            "multi_final", tags::multi_final,
            {{"history", render_history(sample.turns, turns)},
             {"context", accumulated_context(sample.turns, turns + 1).dump(2)},
             {"tool_spec", to_json(target).dump(2)},
             {"request", std::to_string(attempt)}}));
        auto parsed = extract_first_record(reply.text);
        if (parsed && parsed->contains("arguments") && (*parsed)["arguments"].is_object() &&
            parsed->contains("output") && ((*parsed)["output"].is_object() || (*parsed)["output"].is_string())) {
            final = std::move(parsed);
        }
    }
    if (!final) throw GenerationError("final call unparseable after one re-ask");
    sample.final_call = {group.target_id(), (*final)["arguments"]};
    sample.final_output = ToolOutput::from_json((*final)["output"]);
    sample.turns.back().tool_call = sample.final_call;
    sample.turns.back().tool_result = sample.final_output;
    return sample;
}

MultiTurnVerdict validate_multi(const MultiTurnSample& sample, const ToolSpec& target, Backend& backend,
                                const PromptTemplates& prompts) {
    MultiTurnVerdict verdict;
    verdict.call = validate_pair(target, sample.final_call, sample.final_output, backend, prompts);
    if (!verdict.call.passed()) return verdict;
    verdict.coherence = ask_judge(
        backend, prompts.request("judge_coherence", tags::judge_coherence,
                                 {{"history", render_history(sample.turns, sample.turns.size())},
                                  {"final_call", sample.final_call.arguments.dump(2)},
                                  {"output", sample.final_output.to_json().dump(2)}}));
    return verdict;
}

namespace {

enum class Outcome { accepted, rejected_coherence, generation_error, validation_failure, unevaluated };

struct GroupJob {
    Outcome outcome = Outcome::generation_error;
    std::optional<MultiTurnSample> sample;
};

} // namespace

MultiTurnCorpus run_multi_turn(const std::vector<ToolSpec>& tools, Embedder& embedder, Backend& backend,
                               const MultiTurnOptions& options, std::size_t workers,
                               const PromptTemplates& prompts) {
    if (options.turns == 0 || options.turns > kMaxTurns) {
        throw PreconditionError("turns must lie in [1, " + std::to_string(kMaxTurns) + "]");
    }
    if (options.max_group_size == 0) throw PreconditionError("max group size must be at least 1");

    MultiTurnCorpus corpus;
    if (tools.empty() || options.samples == 0) return corpus;

    const EmbeddingMap embeddings = embed_tools(tools, embedder);
    std::map<std::string, ToolSpec, std::less<>> by_id;
    for (const auto& t : tools) by_id.insert_or_assign(t.id(), t);
    std::vector<std::string> ids;
    for (const auto& [id, _] : by_id) ids.push_back(id);
    const std::size_t group_cap = std::min(options.max_group_size, options.turns);

    std::map<std::string, std::size_t> per_seed;
    Rng rng(options.rng_seed);
    for (std::size_t epoch = 1; epoch <= options.max_epochs && corpus.samples.size() < options.samples; ++epoch) {
        std::vector<std::string> order;
        for (std::size_t i : rng.sample_without_replacement(ids.size(), ids.size())) order.push_back(ids[i]);

        std::size_t cursor = 0;
        while (cursor < order.size() && corpus.samples.size() < options.samples) {
            const std::size_t batch = std::min(order.size() - cursor, options.samples - corpus.samples.size());
            auto jobs = parallel_map(batch, workers, [&](std::size_t b) {
                const std::string& seed_id = order[cursor + b];
                GroupJob job;
                ToolGroup group = build_group(seed_id, embeddings, options.theta, group_cap);
                if (options.min_coherence && group.coherence < *options.min_coherence) {
                    job.outcome = Outcome::rejected_coherence;
                    return job;
                }
                const std::uint64_t seed =
                    Rng(options.rng_seed).fork("epoch" + std::to_string(epoch) + "/" + seed_id).seed();
                MultiTurnSample sample;
                try {
                    sample = generate_dialogue(group, by_id, options.turns, backend, seed, prompts);
                } catch (const GenerationError&) {
                    return job;
                } catch (const BackendError&) {
                    return job;
                }
                try {
                    sample.verdict = validate_multi(sample, by_id.at(group.target_id()), backend, prompts);
                } catch (const BackendError&) {
                    job.outcome = Outcome::unevaluated;
                    return job;
                }
                job.outcome = sample.verdict.passed() ? Outcome::accepted : Outcome::validation_failure;
                job.sample = std::move(sample);
                return job;
            });

            for (std::size_t b = 0; b < jobs.size(); ++b) {
                ++corpus.report.groups;
                auto& job = jobs[b];
                switch (job.outcome) {
                case Outcome::rejected_coherence: ++corpus.report.rejected_coherence; break;
                case Outcome::generation_error: ++corpus.report.generation_errors; break;
                case Outcome::validation_failure: ++corpus.report.validation_failures; break;
                case Outcome::unevaluated: ++corpus.report.unevaluated; break;
                case Outcome::accepted: {
                    if (corpus.samples.size() == options.samples) break;
                    const std::string& seed_id = order[cursor + b];
                    job.sample->sample_id = seed_id + "-m" + std::to_string(per_seed[seed_id]++);
                    corpus.samples.push_back(std::move(*job.sample));
                    break;
                }
                }
            }
            cursor += batch;
        }
    }
    corpus.report.accepted = corpus.samples.size();
    std::stable_sort(corpus.samples.begin(), corpus.samples.end(), [](const auto& a, const auto& b) {
        if (a.group.seed_id() != b.group.seed_id()) return a.group.seed_id() < b.group.seed_id();
        return a.sample_id.size() != b.sample_id.size() ? a.sample_id.size() < b.sample_id.size()
                                                         : a.sample_id < b.sample_id;
    });
    return corpus;
}

} // namespace toolweaver
