#include "arq/http_api.hpp"

namespace arq {

namespace {

void send_json(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message,
                Json extra = Json::object()) {
    extra["error"] = code;
    extra["message"] = message;
    send_json(res, status, extra);
}

Json parse_body(const httplib::Request& req) {
    Json body = Json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) throw Error("request body must be a JSON object");
    return body;
}

// Maps engine exceptions to HTTP statuses.
template <typename F>
httplib::Server::Handler guarded(F&& f) {
    return [f = std::forward<F>(f)](const httplib::Request& req, httplib::Response& res) {
        try {
            f(req, res);
        } catch (const TurnFailedError& e) {
            Json extra = {{"module", to_string(e.module())}, {"details", e.details()}};
            send_error(res, 502, "turn-failed", e.what(), extra);
        } catch (const InvalidAgentError& e) {
            send_error(res, 422, "invalid-agent", e.what(), {{"violations", e.violations()}});
        } catch (const UnknownSessionError& e) {
            send_error(res, 404, "not-found", e.what());
        } catch (const UnknownAgentError& e) {
            send_error(res, 404, "not-found", e.what());
        } catch (const ConflictError& e) {
            send_error(res, 409, "conflict", e.what());
        } catch (const StoreError& e) {
            send_error(res, 500, "store-error", e.what());
        } catch (const Error& e) {
            send_error(res, 400, "bad-request", e.what());
        } catch (const Json::exception& e) {
            send_error(res, 400, "bad-request", e.what());
        }
    };
}

}  // namespace

void register_routes(httplib::Server& server, Engine& engine, const ApiOptions& options) {
    if (options.allow_cors) {
        server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                    {"Access-Control-Allow-Headers", "Content-Type"},
                                    {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
        server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    }

    server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, {{"status", "ok"}});
    });

    server.Post("/agents", guarded([&engine](const httplib::Request& req, httplib::Response& res) {
        const Json body = parse_body(req);
        std::optional<std::string> id;
        if (body.contains("id")) id = body.at("id").get<std::string>();
        const Json& def = body.contains("definition") ? body.at("definition") : body;
        const std::string agent_id = engine.create_agent(agent_from_json(def), id);
        send_json(res, 201, {{"agent_id", agent_id}});
    }));

    server.Get(R"(/agents/([^/]+))", guarded([&engine](const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        send_json(res, 200, {{"agent_id", id}, {"definition", to_json(engine.get_agent(id))}});
    }));

    server.Post("/sessions", guarded([&engine](const httplib::Request& req, httplib::Response& res) {
        const Json body = parse_body(req);
        if (!body.contains("agent_id") || !body.at("agent_id").is_string()) throw Error("agent_id is required");
        std::vector<Event> history;
        if (body.contains("history")) {
            for (const auto& e : body.at("history")) history.push_back(event_from_json(e));
        }
        const std::string id = engine.create_session(body.at("agent_id").get<std::string>(), std::move(history));
        send_json(res, 201, {{"session_id", id}});
    }));

    server.Get(R"(/sessions/([^/]+)/events)", guarded([&engine](const httplib::Request& req, httplib::Response& res) {
        const Session s = engine.get_session(req.matches[1]);
        Json events = Json::array();
        for (const auto& e : s.events) events.push_back(to_json(e));
        send_json(res, 200, {{"session_id", s.id}, {"agent_id", s.agent_id}, {"events", events}});
    }));

    server.Post(R"(/sessions/([^/]+)/messages)",
                guarded([&engine](const httplib::Request& req, httplib::Response& res) {
                    const Json body = parse_body(req);
                    if (!body.contains("text") || !body.at("text").is_string()) throw Error("text is required");
                    std::optional<ReasoningMode> mode;
                    if (body.contains("mode") && !body.at("mode").is_null()) {
                        mode = reasoning_mode_from(body.at("mode").get<std::string>());
                    }
                    const TurnOutcome out = engine.process_turn(req.matches[1], body.at("text").get<std::string>(), mode);
                    send_json(res, 200,
                              {{"agent_message", to_json(Event(out.agent_message))},
                               {"turn_id", out.turn_id},
                               {"mode", to_string(out.trace.mode)},
                               {"hallucination_risk", out.trace.message_trace.hallucination_risk}});
                }));

    server.Get(R"(/sessions/([^/]+)/turns/([^/]+)/trace)",
               guarded([&engine](const httplib::Request& req, httplib::Response& res) {
                   send_json(res, 200, engine.get_trace(req.matches[1], req.matches[2]));
               }));

    if (!options.static_dir.empty() && !server.set_mount_point("/", options.static_dir)) {
        throw Error("cannot serve static files from " + options.static_dir);
    }
}

}  // namespace arq
