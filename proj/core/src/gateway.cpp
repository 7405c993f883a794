#include "toolweaver/gateway.hpp"

#include "toolweaver/carg_error.hpp"
#include "toolweaver/errors.hpp"
#include "toolweaver/parallel.hpp"

#include <chrono>
#include <cstdio>

namespace toolweaver {

SimRequest sim_request_from_json(const Json& body) {
    if (!body.is_object()) throw ParseError("request body must be a JSON object");
    SimRequest r;
    try {
        if (const auto it = body.find("tool"); it != body.end() && !it->is_null()) r.tool = tool_spec_from_json(*it);
        if (const auto it = body.find("tool_id"); it != body.end() && !it->is_null()) {
            if (!it->is_string()) throw ParseError("'tool_id' must be a string");
            r.tool_id = it->get<std::string>();
        }
        if (r.tool.has_value() == r.tool_id.has_value()) {
            throw ParseError("exactly one of 'tool' and 'tool_id' must be given");
        }
        if (const auto it = body.find("arguments"); it != body.end()) r.arguments = *it;
        if (const auto it = body.find("history"); it != body.end() && !it->is_null()) {
            if (!it->is_array()) throw ParseError("'history' must be an array");
            for (const auto& h : *it) {
                if (!h.is_object() || !h.contains("call") || !h.contains("response")) {
                    throw ParseError("history entries need 'call' and 'response'");
                }
                r.history.push_back({h["call"], h["response"]});
            }
        }
        if (const auto it = body.find("ground_truth_hint"); it != body.end() && !it->is_null()) {
            if (!it->is_string()) throw ParseError("'ground_truth_hint' must be a string");
            r.ground_truth_hint = it->get<std::string>();
        }
        if (const auto it = body.find("request_id"); it != body.end() && !it->is_null()) {
            if (!it->is_string()) throw ParseError("'request_id' must be a string");
            r.request_id = it->get<std::string>();
        }
        if (const auto it = body.find("temperature"); it != body.end() && !it->is_null()) {
            if (!it->is_number()) throw ParseError("'temperature' must be a number");
            const double t = it->get<double>();
            if (t < 0.0 || t > 2.0) throw ParseError("'temperature' must lie in [0, 2]");
            r.temperature = t;
        }
    } catch (const Json::exception& e) {
        throw ParseError(std::string("malformed request: ") + e.what());
    }
    return r;
}

Json to_json(const SimRequest& request) {
    Json out = {{"arguments", request.arguments}};
    if (request.tool) out["tool"] = to_json(*request.tool);
    if (request.tool_id) out["tool_id"] = *request.tool_id;
    if (!request.history.empty()) {
        Json history = Json::array();
        for (const auto& h : request.history) history.push_back({{"call", h.call}, {"response", h.response}});
        out["history"] = std::move(history);
    }
    if (request.ground_truth_hint) out["ground_truth_hint"] = *request.ground_truth_hint;
    if (!request.request_id.empty()) out["request_id"] = request.request_id;
    if (request.temperature) out["temperature"] = *request.temperature;
    return out;
}

std::string_view to_string(SimStatus status) {
    switch (status) {
    case SimStatus::ok: return "ok";
    case SimStatus::tool_error: return "tool_error";
    case SimStatus::backend_error: return "backend_error";
    }
    return "unknown";
}

Json to_json(const SimResponse& response) {
    Json out = {{"request_id", response.request_id},
                {"status", to_string(response.status)},
                {"latency", response.latency},
                {"cached", response.cached}};
    if (response.status == SimStatus::ok && response.payload) {
        out["payload"] = response.payload->to_json();
    } else {
        out["error_message"] = response.error_message;
    }
    return out;
}

SimResponse sim_response_from_json(const Json& body) {
    try {
        SimResponse r;
        r.request_id = body.at("request_id").get<std::string>();
        const auto status = body.at("status").get<std::string>();
        if (status == "ok") {
            r.status = SimStatus::ok;
            r.payload = ToolOutput::from_json(body.at("payload"));
        } else if (status == "tool_error" || status == "backend_error") {
            r.status = status == "tool_error" ? SimStatus::tool_error : SimStatus::backend_error;
            r.error_message = body.at("error_message").get<std::string>();
        } else {
            throw ParseError("unknown status '" + status + "'");
        }
        r.latency = body.value("latency", 0.0);
        r.cached = body.value("cached", false);
        return r;
    } catch (const Json::exception& e) {
        throw ParseError(std::string("malformed response: ") + e.what());
    }
}

std::string cache_key(const ToolSpec& tool, const Json& arguments, const std::vector<HistoryEntry>& history,
                      const std::optional<std::string>& hint) {
    Json h = Json::array();
    for (const auto& e : history) h.push_back({{"call", e.call}, {"response", e.response}});
    const Json material = {{"tool", canonical_serialize(tool)},
                           {"arguments", canonical_dump(arguments)},
                           {"history", sha256_hex(canonical_dump(h))},
                           {"hint", hint ? Json(*hint) : Json(nullptr)}};
    return sha256_hex(canonical_dump(material));
}

Gateway::Gateway(std::shared_ptr<Backend> backend, std::shared_ptr<ToolRegistry> registry, GatewayOptions options,
                 const PromptTemplates& prompts)
    : backend_(std::move(backend)),
      registry_(registry ? std::move(registry) : std::make_shared<ToolRegistry>()),
      options_(options),
      prompts_(prompts),
      cache_(options.cache_capacity),
      request_prefix_("req-") {
    if (!backend_) throw PreconditionError("gateway needs a backend");
    if (options_.batch_concurrency == 0) throw PreconditionError("batch concurrency must be positive");
}

ToolSpec Gateway::resolve(const SimRequest& request) const {
    if (request.tool.has_value() == request.tool_id.has_value()) {
        throw PreconditionError("exactly one of tool and tool_id must be given");
    }
    if (request.tool) {
        const auto verdict = validate_tool_spec(*request.tool);
        if (!verdict.passed()) throw PreconditionError("invalid inline tool spec: " + verdict.reasons.front());
        return *request.tool;
    }
    auto found = registry_->find(*request.tool_id);
    if (!found) throw ToolNotFound("unknown tool '" + *request.tool_id + "'");
    return std::move(*found);
}

std::string Gateway::next_request_id() {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%08llu", static_cast<unsigned long long>(++request_counter_));
    return request_prefix_ + buf;
}

namespace {

std::string render_sim_history(const std::vector<HistoryEntry>& history, std::size_t window) {
    if (history.empty()) return "(none)";
    const std::size_t start = history.size() > window ? history.size() - window : 0;
    std::string out;
    if (start > 0) out += "(" + std::to_string(start) + " earlier calls omitted)\n";
    for (std::size_t i = start; i < history.size(); ++i) {
        out += "call: " + history[i].call.dump() + "\nresponse: " + history[i].response.dump() + "\n";
    }
    return out;
}

} // namespace

ToolOutput Gateway::run_simulation(const ToolSpec& tool, const SimRequest& request, bool& schema_ok) {
    PromptVars vars{{"tool_spec", to_json(tool).dump(2)},
                    {"history", render_sim_history(request.history, options_.history_window)},
                    {"hint", request.ground_truth_hint.value_or("none")},
                    {"arguments", request.arguments.dump(2)},
                    {"repair", ""}};
    for (int attempt = 0; attempt < 2; ++attempt) {
        auto gen = prompts_.request("simulate", tags::simulate, vars);
        gen.temperature = request.temperature.value_or(options_.temperature);
        ++simulations_;
        const auto reply = backend_->generate(gen);

        std::vector<FormatIssue> issues;
        ToolOutput output;
        if (tool.responses.empty()) {
            if (auto parsed = extract_first_record(reply.text); parsed && parsed->empty()) {
                output = ToolOutput::structured(Json::object());
            } else {
                output = ToolOutput::text(trim(reply.text));
            }
        } else if (auto parsed = extract_first_record(reply.text)) {
            output = ToolOutput::structured(std::move(*parsed));
            issues = check_output(tool, output);
        } else {
            issues.push_back({FormatIssueKind::output_not_structured, {}, "object", "text"});
        }
        if (issues.empty()) {
            schema_ok = true;
            return output;
        }
        std::string repair = "Your previous reply did not match the response schema:\n";
        for (const auto& i : issues) repair += "- " + i.message() + "\n";
        vars["repair"] = repair;
    }
    schema_ok = false;
    return {};
}

SimResponse Gateway::simulate(const SimRequest& request) {
    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };
    const ToolSpec tool = resolve(request);

    SimResponse response;
    response.request_id = request.request_id.empty() ? next_request_id() : request.request_id;

    const auto issues = check_arguments(tool, request.arguments);
    if (!issues.empty()) {
        response.status = SimStatus::tool_error;
        response.error_message = template_error_message(issues.front());
        response.latency = elapsed();
        return response;
    }

    const std::string key = cache_key(tool, request.arguments, request.history, request.ground_truth_hint);
    auto finish = [&](const std::optional<Json>& payload, bool cached) {
        if (payload) {
            response.status = SimStatus::ok;
            response.payload = ToolOutput::from_json(*payload);
        } else {
            response.status = SimStatus::tool_error;
            response.error_message = kSchemaFailureMessage;
        }
        response.cached = cached;
        response.latency = elapsed();
        return response;
    };
    if (auto hit = cache_.get(key)) return finish(hit, true);

    std::promise<std::optional<Json>> promise;
    std::shared_future<std::optional<Json>> flight;
    bool leader = false;
    {
        std::lock_guard lock(flights_mutex_);
        if (const auto it = flights_.find(key); it != flights_.end()) {
            flight = it->second;
        } else if (auto hit = cache_.get(key)) {
            return finish(hit, true);
        } else {
            flight = promise.get_future().share();
            flights_.emplace(key, flight);
            leader = true;
        }
    }
    if (!leader) return finish(flight.get(), true);

    try {
        bool schema_ok = false;
        ToolOutput output = run_simulation(tool, request, schema_ok);
        std::optional<Json> payload;
        if (schema_ok) {
            payload = output.to_json();
            cache_.put(key, *payload);
        }
        promise.set_value(payload);
    } catch (...) {
        promise.set_exception(std::current_exception());
    }
    {
        std::lock_guard lock(flights_mutex_);
        flights_.erase(key);
    }
    return finish(flight.get(), false);
}

std::vector<SimResponse> Gateway::simulate_batch(std::span<const SimRequest> requests) {
    return parallel_map(requests.size(), options_.batch_concurrency, [&](std::size_t i) {
        const auto& request = requests[i];
        try {
            return simulate(request);
        } catch (const BackendError& e) {
            SimResponse r;
            r.request_id = request.request_id.empty() ? next_request_id() : request.request_id;
            r.status = SimStatus::backend_error;
            r.error_message = e.what();
            return r;
        } catch (const Error& e) {
            SimResponse r;
            r.request_id = request.request_id.empty() ? next_request_id() : request.request_id;
            r.status = SimStatus::tool_error;
            r.error_message = e.what();
            return r;
        }
    });
}

} // namespace toolweaver
