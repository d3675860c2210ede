#pragma once

#include "arq/json.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace arq {

/// A "When <condition> Then <action>" behavioral rule.
struct Guideline {
    std::string id;
    std::string condition;
    std::string action;
    std::vector<std::string> tool_ids;
};

enum class ParamType { String, Number, Boolean, Enum };

struct ToolParameter {
    std::string name;
    ParamType type = ParamType::String;
    std::vector<std::string> enum_values;
    std::string description;
    bool required = true;
};

/// Canned results keyed by canonical argument text.
struct ScriptedBinding {
    struct Entry {
        std::string canonical_args;
        Json result;
    };
    std::vector<Entry> results;
    std::optional<Json> default_result;
};

struct HttpBinding {
    std::string endpoint;
    int timeout_ms = 10000;
};

using ToolBinding = std::variant<ScriptedBinding, HttpBinding>;

struct ToolDescriptor {
    std::string name;
    std::string description;
    std::vector<ToolParameter> parameters;
    ToolBinding binding = ScriptedBinding{};

    const ToolParameter* find_parameter(const std::string& param) const;
};

struct GlossaryTerm {
    std::string term;
    std::string definition;
};

struct AgentDefinition {
    std::string profile;
    std::vector<Guideline> guidelines;
    std::vector<ToolDescriptor> tools;
    std::vector<GlossaryTerm> glossary;

    const Guideline* find_guideline(const std::string& id) const;
    const ToolDescriptor* find_tool(const std::string& name) const;
};

/// Every invariant violation found, in a stable order. Empty means valid.
std::vector<std::string> validate_agent_definition(const AgentDefinition& def);

class InvalidAgentError : public Error {
public:
    explicit InvalidAgentError(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const { return violations_; }

private:
    std::vector<std::string> violations_;
};

std::string to_string(ParamType type);

Json to_json(const AgentDefinition& def);
Json to_json(const ToolDescriptor& tool);

/// Parses the agent configuration format. Throws arq::Error naming the
/// offending field on malformed input; does not run invariant validation.
AgentDefinition agent_from_json(const Json& j);

/// Loads, parses and validates. Throws InvalidAgentError on violations.
AgentDefinition load_agent_file(const std::string& path);

}  // namespace arq
