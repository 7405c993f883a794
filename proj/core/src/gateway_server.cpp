#include "toolweaver/errors.hpp"
#include "toolweaver/gateway.hpp"

#include <httplib.h>

namespace toolweaver {

namespace {

void reply(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, std::string_view message) {
    reply(res, status, Json{{"error", message}});
}

std::optional<Json> parse_body(const httplib::Request& req, httplib::Response& res) {
    try {
        return parse_strict(req.body);
    } catch (const ParseError& e) {
        reply_error(res, 400, e.what());
        return std::nullopt;
    }
}

Json spec_with_id(const ToolSpec& spec) {
    Json out = to_json(spec);
    out["id"] = spec.id();
    return out;
}

} // namespace

struct GatewayServer::Impl {
    std::shared_ptr<Gateway> gateway;
    ServerOptions options;
    httplib::Server server;
    bool bound = false;

    void routes();
};

void GatewayServer::Impl::routes() {
    server.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
        reply(res, 200, Json{{"status", "ok"}, {"tools_loaded", gateway->registry().size()}});
    });

    server.Post("/v1/simulate", [this](const httplib::Request& req, httplib::Response& res) {
        const auto body = parse_body(req, res);
        if (!body) return;
        try {
            const auto request = sim_request_from_json(*body);
            reply(res, 200, to_json(gateway->simulate(request)));
        } catch (const ParseError& e) {
            reply_error(res, 400, e.what());
        } catch (const ToolNotFound& e) {
            reply_error(res, 404, e.what());
        } catch (const PreconditionError& e) {
            reply_error(res, 400, e.what());
        } catch (const BackendError& e) {
            reply_error(res, 502, e.what());
        }
    });

    server.Post("/v1/simulate_batch", [this](const httplib::Request& req, httplib::Response& res) {
        const auto body = parse_body(req, res);
        if (!body) return;
        if (!body->is_object() || !body->contains("requests") || !(*body)["requests"].is_array()) {
            reply_error(res, 400, "body must be {\"requests\": [...]}");
            return;
        }
        std::vector<SimRequest> requests;
        const auto& items = (*body)["requests"];
        for (std::size_t i = 0; i < items.size(); ++i) {
            try {
                requests.push_back(sim_request_from_json(items[i]));
            } catch (const ParseError& e) {
                reply_error(res, 400, "requests[" + std::to_string(i) + "]: " + e.what());
                return;
            }
        }
        Json out = Json::array();
        for (const auto& r : gateway->simulate_batch(requests)) out.push_back(to_json(r));
        reply(res, 200, Json{{"responses", std::move(out)}});
    });

    server.Get("/v1/tools", [this](const httplib::Request&, httplib::Response& res) {
        Json tools = Json::array();
        for (const auto& t : gateway->registry().list()) tools.push_back(spec_with_id(t));
        reply(res, 200, Json{{"tools", std::move(tools)}});
    });

    server.Get(R"(/v1/tools/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        const auto spec = gateway->registry().find(req.matches[1].str());
        if (!spec) {
            reply_error(res, 404, "unknown tool '" + req.matches[1].str() + "'");
            return;
        }
        reply(res, 200, spec_with_id(*spec));
    });

    server.Post("/v1/tools", [this](const httplib::Request& req, httplib::Response& res) {
        const auto body = parse_body(req, res);
        if (!body) return;
        try {
            const std::string id = gateway->registry().add(tool_spec_from_json(*body));
            reply(res, 201, Json{{"id", id}});
        } catch (const ParseError& e) {
            reply_error(res, 400, e.what());
        } catch (const ValidationError& e) {
            reply_error(res, 422, e.what());
        }
    });
}

GatewayServer::GatewayServer(std::shared_ptr<Gateway> gateway, ServerOptions options)
    : impl_(std::make_unique<Impl>()) {
    if (!gateway) throw PreconditionError("server needs a gateway");
    impl_->gateway = std::move(gateway);
    impl_->options = std::move(options);
    const std::size_t threads = std::max<std::size_t>(impl_->options.threads, 1);
    impl_->server.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
    impl_->routes();
}

GatewayServer::~GatewayServer() { stop(); }

int GatewayServer::bind() {
    auto& o = impl_->options;
    if (o.port == 0) {
        const int port = impl_->server.bind_to_any_port(o.host);
        if (port < 0) throw IoError("cannot bind " + o.host + " on any port");
        o.port = port;
    } else if (!impl_->server.bind_to_port(o.host, o.port)) {
        throw IoError("cannot bind " + o.host + ":" + std::to_string(o.port));
    }
    impl_->bound = true;
    return o.port;
}

void GatewayServer::listen() {
    if (!impl_->bound) throw PreconditionError("listen() before bind()");
    impl_->server.listen_after_bind();
}

void GatewayServer::stop() {
    if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

} // namespace toolweaver
