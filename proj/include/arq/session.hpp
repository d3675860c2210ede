#pragma once

#include "arq/json.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace arq {

struct CustomerMessage {
    std::string text;
};

struct AgentMessage {
    std::string text;
    std::string trace_ref;  // turn id whose trace produced this message; empty for seeded history
};

/// A tool execution. Arguments are held as canonical JSON text so that
/// duplicate detection is a plain string comparison.
struct ToolResult {
    std::string tool;
    std::string canonical_args;
    Json result;

    bool same_call(const ToolResult& other) const {
        return tool == other.tool && canonical_args == other.canonical_args;
    }
};

using Event = std::variant<CustomerMessage, AgentMessage, ToolResult>;

struct Session {
    std::string id;
    std::string agent_id;
    std::vector<Event> events;
    std::vector<ToolResult> staged_calls;
};

class UnknownSessionError : public Error {
public:
    explicit UnknownSessionError(const std::string& id) : Error("unknown session " + id) {}
};

/// Returns session with event appended; prior events are untouched.
Session append_event(Session session, Event event);

/// Last customer message in the log, if any.
std::optional<std::string> last_customer_message(const Session& session);

std::vector<std::string> prior_agent_messages(const Session& session);

Json to_json(const Event& event);
Event event_from_json(const Json& j);

Json to_json(const ToolResult& call);
ToolResult tool_result_from_json(const Json& j);

Json to_json(const Session& session);
Session session_from_json(const Json& j);

}  // namespace arq
