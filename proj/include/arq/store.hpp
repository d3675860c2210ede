#pragma once

#include "arq/agent.hpp"
#include "arq/session.hpp"

#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace arq {

/// A session together with the traces of its completed turns.
struct SessionRecord {
    Session session;
    std::map<std::string, Json> traces;  // turn id -> trace
};

Json to_json(const SessionRecord& r);
SessionRecord session_record_from_json(const Json& j);

class UnknownAgentError : public Error {
public:
    explicit UnknownAgentError(const std::string& id) : Error("unknown agent " + id) {}
};

class StoreError : public Error {
public:
    using Error::Error;
};

/// Persistence for agents and sessions. Implementations must be safe to call
/// from several threads for different ids.
class SessionStore {
public:
    virtual ~SessionStore() = default;

    virtual void save_session(const SessionRecord& record) = 0;
    /// Throws UnknownSessionError.
    virtual SessionRecord load_session(const std::string& id) const = 0;
    virtual bool has_session(const std::string& id) const = 0;

    virtual void save_agent(const std::string& id, const AgentDefinition& def) = 0;
    /// Throws UnknownAgentError.
    virtual AgentDefinition load_agent(const std::string& id) const = 0;
    virtual std::vector<std::string> agent_ids() const = 0;
};

class MemoryStore : public SessionStore {
public:
    void save_session(const SessionRecord& record) override;
    SessionRecord load_session(const std::string& id) const override;
    bool has_session(const std::string& id) const override;
    void save_agent(const std::string& id, const AgentDefinition& def) override;
    AgentDefinition load_agent(const std::string& id) const override;
    std::vector<std::string> agent_ids() const override;

private:
    mutable std::mutex mutex_;
    std::map<std::string, std::string> sessions_;  // canonical JSON, so loads never alias stored state
    std::map<std::string, std::string> agents_;
};

/// One canonical JSON file per session under <root>/sessions and per agent
/// under <root>/agents. Writes go through a temporary file and a rename.
class FileStore : public SessionStore {
public:
    explicit FileStore(std::string root);

    void save_session(const SessionRecord& record) override;
    SessionRecord load_session(const std::string& id) const override;
    bool has_session(const std::string& id) const override;
    void save_agent(const std::string& id, const AgentDefinition& def) override;
    AgentDefinition load_agent(const std::string& id) const override;
    std::vector<std::string> agent_ids() const override;

    const std::string& root() const { return root_; }

private:
    std::string session_path(const std::string& id) const;
    std::string agent_path(const std::string& id) const;

    std::string root_;
};

/// Ids become file names, so only [A-Za-z0-9_.-] is accepted.
bool is_valid_id(const std::string& id);

}  // namespace arq
