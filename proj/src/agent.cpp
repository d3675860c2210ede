#include "arq/agent.hpp"

#include <set>

namespace arq {

namespace {

std::string join(const std::vector<std::string>& items, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

const Json& require(const Json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw Error(where + ": missing field '" + key + "'");
    }
    return obj.at(key);
}

std::string require_string(const Json& obj, const char* key, const std::string& where) {
    const Json& v = require(obj, key, where);
    if (!v.is_string()) throw Error(where + "." + key + ": expected string");
    return v.get<std::string>();
}

std::string optional_string(const Json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) return {};
    const Json& v = obj.at(key);
    if (!v.is_string()) throw Error(where + "." + key + ": expected string");
    return v.get<std::string>();
}

ParamType param_type_from(const std::string& s, const std::string& where) {
    if (s == "string") return ParamType::String;
    if (s == "number") return ParamType::Number;
    if (s == "boolean") return ParamType::Boolean;
    if (s == "enum") return ParamType::Enum;
    throw Error(where + ".type: unknown parameter type '" + s + "'");
}

ToolBinding binding_from(const Json& j, const std::string& where) {
    if (!j.is_object()) throw Error(where + ": expected object");
    const std::string type = require_string(j, "type", where);
    if (type == "scripted") {
        ScriptedBinding b;
        if (j.contains("results")) {
            const Json& results = j.at("results");
            if (!results.is_array()) throw Error(where + ".results: expected array");
            for (std::size_t i = 0; i < results.size(); ++i) {
                const std::string w = where + ".results[" + std::to_string(i) + "]";
                b.results.push_back({canonical_json(require(results[i], "arguments", w)),
                                     require(results[i], "result", w)});
            }
        }
        if (j.contains("default")) b.default_result = j.at("default");
        return b;
    }
    if (type == "http") {
        HttpBinding b;
        b.endpoint = require_string(j, "endpoint", where);
        if (j.contains("timeout_ms")) {
            if (!j.at("timeout_ms").is_number_integer() || j.at("timeout_ms").get<int>() <= 0) {
                throw Error(where + ".timeout_ms: expected positive integer");
            }
            b.timeout_ms = j.at("timeout_ms").get<int>();
        }
        return b;
    }
    throw Error(where + ".type: unknown binding type '" + type + "'");
}

Json binding_to_json(const ToolBinding& binding) {
    if (const auto* s = std::get_if<ScriptedBinding>(&binding)) {
        Json results = Json::array();
        for (const auto& e : s->results) {
            results.push_back({{"arguments", parse_json(e.canonical_args)}, {"result", e.result}});
        }
        Json j = {{"type", "scripted"}, {"results", results}};
        if (s->default_result) j["default"] = *s->default_result;
        return j;
    }
    const auto& h = std::get<HttpBinding>(binding);
    return {{"type", "http"}, {"endpoint", h.endpoint}, {"timeout_ms", h.timeout_ms}};
}

}  // namespace

const ToolParameter* ToolDescriptor::find_parameter(const std::string& param) const {
    for (const auto& p : parameters) {
        if (p.name == param) return &p;
    }
    return nullptr;
}

const Guideline* AgentDefinition::find_guideline(const std::string& id) const {
    for (const auto& g : guidelines) {
        if (g.id == id) return &g;
    }
    return nullptr;
}

const ToolDescriptor* AgentDefinition::find_tool(const std::string& name) const {
    for (const auto& t : tools) {
        if (t.name == name) return &t;
    }
    return nullptr;
}

std::vector<std::string> validate_agent_definition(const AgentDefinition& def) {
    std::vector<std::string> violations;

    std::set<std::string> seen_ids;
    std::set<std::string> attached;
    for (const auto& g : def.guidelines) {
        if (!seen_ids.insert(g.id).second) violations.push_back("duplicate id " + g.id);
        if (g.condition.empty()) violations.push_back("guideline " + g.id + " has empty condition");
        if (g.action.empty()) violations.push_back("guideline " + g.id + " has empty action");
        for (const auto& tool_id : g.tool_ids) {
            attached.insert(tool_id);
            if (!def.find_tool(tool_id)) {
                violations.push_back("guideline " + g.id + " references unknown tool " + tool_id);
            }
        }
    }

    std::set<std::string> seen_tools;
    for (const auto& t : def.tools) {
        if (!seen_tools.insert(t.name).second) violations.push_back("duplicate tool " + t.name);
        if (!attached.count(t.name)) violations.push_back("tool " + t.name + " attached to no guideline");
        std::set<std::string> params;
        for (const auto& p : t.parameters) {
            if (!params.insert(p.name).second) {
                violations.push_back("tool " + t.name + " has duplicate parameter " + p.name);
            }
            if (p.type == ParamType::Enum && p.enum_values.empty()) {
                violations.push_back("tool " + t.name + " enum parameter " + p.name + " has no values");
            }
        }
    }
    return violations;
}

InvalidAgentError::InvalidAgentError(std::vector<std::string> violations)
    : Error("invalid agent definition: " + join(violations, "; ")),
      violations_(std::move(violations)) {}

std::string to_string(ParamType type) {
    switch (type) {
    case ParamType::String: return "string";
    case ParamType::Number: return "number";
    case ParamType::Boolean: return "boolean";
    case ParamType::Enum: return "enum";
    }
    return "string";
}

Json to_json(const ToolDescriptor& t) {
    Json params = Json::array();
    for (const auto& p : t.parameters) {
        Json pj = {{"name", p.name},
                   {"type", to_string(p.type)},
                   {"description", p.description},
                   {"required", p.required}};
        if (p.type == ParamType::Enum) pj["values"] = p.enum_values;
        params.push_back(std::move(pj));
    }
    return {{"name", t.name},
            {"description", t.description},
            {"parameters", params},
            {"binding", binding_to_json(t.binding)}};
}

Json to_json(const AgentDefinition& def) {
    Json guidelines = Json::array();
    for (const auto& g : def.guidelines) {
        guidelines.push_back(
            {{"id", g.id}, {"condition", g.condition}, {"action", g.action}, {"tools", g.tool_ids}});
    }
    Json tools = Json::array();
    for (const auto& t : def.tools) tools.push_back(to_json(t));
    Json glossary = Json::array();
    for (const auto& term : def.glossary) {
        glossary.push_back({{"term", term.term}, {"definition", term.definition}});
    }
    return {{"profile", def.profile},
            {"guidelines", guidelines},
            {"tools", tools},
            {"glossary", glossary}};
}

AgentDefinition agent_from_json(const Json& j) {
    if (!j.is_object()) throw Error("agent: expected object");
    AgentDefinition def;
    def.profile = optional_string(j, "profile", "agent");

    if (j.contains("guidelines")) {
        const Json& gs = j.at("guidelines");
        if (!gs.is_array()) throw Error("agent.guidelines: expected array");
        for (std::size_t i = 0; i < gs.size(); ++i) {
            const std::string w = "agent.guidelines[" + std::to_string(i) + "]";
            Guideline g;
            g.id = require_string(gs[i], "id", w);
            g.condition = require_string(gs[i], "condition", w);
            g.action = require_string(gs[i], "action", w);
            if (gs[i].contains("tools")) {
                const Json& ts = gs[i].at("tools");
                if (!ts.is_array()) throw Error(w + ".tools: expected array");
                for (const auto& t : ts) {
                    if (!t.is_string()) throw Error(w + ".tools: expected strings");
                    g.tool_ids.push_back(t.get<std::string>());
                }
            }
            def.guidelines.push_back(std::move(g));
        }
    }

    if (j.contains("tools")) {
        const Json& ts = j.at("tools");
        if (!ts.is_array()) throw Error("agent.tools: expected array");
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const std::string w = "agent.tools[" + std::to_string(i) + "]";
            ToolDescriptor t;
            t.name = require_string(ts[i], "name", w);
            t.description = optional_string(ts[i], "description", w);
            if (ts[i].contains("parameters")) {
                const Json& ps = ts[i].at("parameters");
                if (!ps.is_array()) throw Error(w + ".parameters: expected array");
                for (std::size_t k = 0; k < ps.size(); ++k) {
                    const std::string pw = w + ".parameters[" + std::to_string(k) + "]";
                    ToolParameter p;
                    p.name = require_string(ps[k], "name", pw);
                    p.type = param_type_from(require_string(ps[k], "type", pw), pw);
                    p.description = optional_string(ps[k], "description", pw);
                    if (ps[k].contains("required")) {
                        if (!ps[k].at("required").is_boolean()) throw Error(pw + ".required: expected boolean");
                        p.required = ps[k].at("required").get<bool>();
                    }
                    if (ps[k].contains("values")) {
                        for (const auto& v : ps[k].at("values")) {
                            if (!v.is_string()) throw Error(pw + ".values: expected strings");
                            p.enum_values.push_back(v.get<std::string>());
                        }
                    }
                    t.parameters.push_back(std::move(p));
                }
            }
            if (ts[i].contains("binding")) t.binding = binding_from(ts[i].at("binding"), w + ".binding");
            def.tools.push_back(std::move(t));
        }
    }

    if (j.contains("glossary")) {
        const Json& gl = j.at("glossary");
        if (!gl.is_array()) throw Error("agent.glossary: expected array");
        for (std::size_t i = 0; i < gl.size(); ++i) {
            const std::string w = "agent.glossary[" + std::to_string(i) + "]";
            def.glossary.push_back({require_string(gl[i], "term", w), require_string(gl[i], "definition", w)});
        }
    }
    return def;
}

AgentDefinition load_agent_file(const std::string& path) {
    AgentDefinition def = agent_from_json(load_json_file(path));
    auto violations = validate_agent_definition(def);
    if (!violations.empty()) throw InvalidAgentError(std::move(violations));
    return def;
}

}  // namespace arq
