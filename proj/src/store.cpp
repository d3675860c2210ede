#include "arq/store.hpp"

#include <filesystem>

namespace arq {

namespace fs = std::filesystem;

Json to_json(const SessionRecord& r) {
    Json traces = Json::object();
    for (const auto& [id, t] : r.traces) traces[id] = t;
    return {{"session", to_json(r.session)}, {"traces", traces}};
}

SessionRecord session_record_from_json(const Json& j) {
    SessionRecord r;
    r.session = session_from_json(j.at("session"));
    if (j.contains("traces")) {
        for (auto it = j.at("traces").begin(); it != j.at("traces").end(); ++it) r.traces[it.key()] = it.value();
    }
    return r;
}

bool is_valid_id(const std::string& id) {
    if (id.empty() || id.size() > 128 || id == "." || id == "..") return false;
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                        c == '_' || c == '.';
        if (!ok) return false;
    }
    return true;
}

void MemoryStore::save_session(const SessionRecord& record) {
    std::string text = canonical_json(to_json(record));
    std::lock_guard lock(mutex_);
    sessions_[record.session.id] = std::move(text);
}

SessionRecord MemoryStore::load_session(const std::string& id) const {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw UnknownSessionError(id);
    return session_record_from_json(Json::parse(it->second));
}

bool MemoryStore::has_session(const std::string& id) const {
    std::lock_guard lock(mutex_);
    return sessions_.count(id) > 0;
}

void MemoryStore::save_agent(const std::string& id, const AgentDefinition& def) {
    std::string text = canonical_json(to_json(def));
    std::lock_guard lock(mutex_);
    agents_[id] = std::move(text);
}

AgentDefinition MemoryStore::load_agent(const std::string& id) const {
    std::lock_guard lock(mutex_);
    auto it = agents_.find(id);
    if (it == agents_.end()) throw UnknownAgentError(id);
    return agent_from_json(Json::parse(it->second));
}

std::vector<std::string> MemoryStore::agent_ids() const {
    std::lock_guard lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [id, _] : agents_) out.push_back(id);
    return out;
}

FileStore::FileStore(std::string root) : root_(std::move(root)) {
    std::error_code ec;
    fs::create_directories(fs::path(root_) / "sessions", ec);
    if (!ec) fs::create_directories(fs::path(root_) / "agents", ec);
    if (ec) throw StoreError("cannot create store directory " + root_ + ": " + ec.message());
}

std::string FileStore::session_path(const std::string& id) const {
    if (!is_valid_id(id)) throw UnknownSessionError(id);
    return (fs::path(root_) / "sessions" / (id + ".json")).string();
}

std::string FileStore::agent_path(const std::string& id) const {
    if (!is_valid_id(id)) throw UnknownAgentError(id);
    return (fs::path(root_) / "agents" / (id + ".json")).string();
}

void FileStore::save_session(const SessionRecord& record) {
    try {
        write_file_atomic(session_path(record.session.id), canonical_json(to_json(record)));
    } catch (const UnknownSessionError&) {
        throw StoreError("invalid session id '" + record.session.id + "'");
    } catch (const Error& e) {
        throw StoreError(e.what());
    }
}

SessionRecord FileStore::load_session(const std::string& id) const {
    const std::string path = session_path(id);
    if (!fs::exists(path)) throw UnknownSessionError(id);
    return session_record_from_json(load_json_file(path));
}

bool FileStore::has_session(const std::string& id) const {
    return is_valid_id(id) && fs::exists(session_path(id));
}

void FileStore::save_agent(const std::string& id, const AgentDefinition& def) {
    if (!is_valid_id(id)) throw StoreError("invalid agent id '" + id + "'");
    try {
        write_file_atomic(agent_path(id), canonical_json(to_json(def)));
    } catch (const Error& e) {
        throw StoreError(e.what());
    }
}

AgentDefinition FileStore::load_agent(const std::string& id) const {
    const std::string path = agent_path(id);
    if (!fs::exists(path)) throw UnknownAgentError(id);
    return agent_from_json(load_json_file(path));
}

std::vector<std::string> FileStore::agent_ids() const {
    std::vector<std::string> out;
    for (const auto& entry : fs::directory_iterator(fs::path(root_) / "agents")) {
        if (entry.path().extension() == ".json") out.push_back(entry.path().stem().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace arq
