#include "arq/session.hpp"

namespace arq {

namespace {

std::string get_string(const Json& j, const char* key, const char* where) {
    if (!j.is_object() || !j.contains(key) || !j.at(key).is_string()) {
        throw Error(std::string(where) + ": missing string field '" + key + "'");
    }
    return j.at(key).get<std::string>();
}

}  // namespace

Session append_event(Session session, Event event) {
    session.events.push_back(std::move(event));
    return session;
}

std::optional<std::string> last_customer_message(const Session& session) {
    for (auto it = session.events.rbegin(); it != session.events.rend(); ++it) {
        if (const auto* m = std::get_if<CustomerMessage>(&*it)) return m->text;
    }
    return std::nullopt;
}

std::vector<std::string> prior_agent_messages(const Session& session) {
    std::vector<std::string> out;
    for (const auto& e : session.events) {
        if (const auto* m = std::get_if<AgentMessage>(&e)) out.push_back(m->text);
    }
    return out;
}

Json to_json(const ToolResult& call) {
    return {{"tool", call.tool}, {"arguments", parse_json(call.canonical_args)}, {"result", call.result}};
}

ToolResult tool_result_from_json(const Json& j) {
    ToolResult r;
    r.tool = get_string(j, "tool", "tool_result");
    r.canonical_args = canonical_json(j.contains("arguments") ? j.at("arguments") : Json::object());
    r.result = j.contains("result") ? j.at("result") : Json();
    return r;
}

Json to_json(const Event& event) {
    return std::visit(
        [](const auto& e) -> Json {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, CustomerMessage>) {
                return {{"kind", "customer_message"}, {"text", e.text}};
            } else if constexpr (std::is_same_v<T, AgentMessage>) {
                Json j = {{"kind", "agent_message"}, {"text", e.text}};
                if (!e.trace_ref.empty()) j["trace_ref"] = e.trace_ref;
                return j;
            } else {
                Json j = to_json(static_cast<const ToolResult&>(e));
                j["kind"] = "tool_result";
                return j;
            }
        },
        event);
}

Event event_from_json(const Json& j) {
    const std::string kind = get_string(j, "kind", "event");
    if (kind == "customer_message") return CustomerMessage{get_string(j, "text", "customer_message")};
    if (kind == "agent_message") {
        AgentMessage m{get_string(j, "text", "agent_message"), {}};
        if (j.contains("trace_ref")) m.trace_ref = j.at("trace_ref").get<std::string>();
        return m;
    }
    if (kind == "tool_result") return tool_result_from_json(j);
    throw Error("event: unknown kind '" + kind + "'");
}

Json to_json(const Session& session) {
    Json events = Json::array();
    for (const auto& e : session.events) events.push_back(to_json(e));
    Json staged = Json::array();
    for (const auto& c : session.staged_calls) staged.push_back(to_json(c));
    return {{"id", session.id},
            {"agent_id", session.agent_id},
            {"events", events},
            {"staged_calls", staged}};
}

Session session_from_json(const Json& j) {
    Session s;
    s.id = get_string(j, "id", "session");
    s.agent_id = get_string(j, "agent_id", "session");
    if (j.contains("events")) {
        for (const auto& e : j.at("events")) s.events.push_back(event_from_json(e));
    }
    if (j.contains("staged_calls")) {
        for (const auto& c : j.at("staged_calls")) s.staged_calls.push_back(tool_result_from_json(c));
    }
    return s;
}

}  // namespace arq
