#include "arq/prompt_assets.hpp"

#include <cstdlib>
#include <filesystem>

#ifndef ARQ_ASSET_DIR
#define ARQ_ASSET_DIR "assets"
#endif

namespace arq {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

constexpr Module kPromptModules[] = {Module::Proposer, Module::ToolCaller, Module::MessageGenerator, Module::Judge};

}  // namespace

std::string render_prompt_template(const std::string& text, const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (true) {
        const auto open = text.find("{{", pos);
        if (open == std::string::npos) {
            out.append(text, pos, std::string::npos);
            break;
        }
        const auto close = text.find("}}", open + 2);
        if (close == std::string::npos) throw Error("prompt template: unterminated placeholder");
        out.append(text, pos, open - pos);
        const std::string name = trim(text.substr(open + 2, close - open - 2));
        auto it = values.find(name);
        if (it == values.end()) throw Error("prompt template: no value for placeholder '" + name + "'");
        out += it->second;
        pos = close + 2;
    }
    return out;
}

PromptAssets PromptAssets::load(const std::string& dir) {
    namespace fs = std::filesystem;
    PromptAssets assets;
    for (Module m : kPromptModules) {
        const std::string name = to_string(m);
        assets.templates_[m] = read_text_file((fs::path(dir) / "prompts" / (name + ".txt")).string());
        const fs::path examples = fs::path(dir) / "examples" / (name + ".json");
        std::vector<PromptExample> list;
        if (fs::exists(examples)) {
            const Json j = load_json_file(examples.string());
            if (!j.is_array()) throw Error(examples.string() + ": expected array of examples");
            for (const auto& e : j) {
                if (!e.is_object() || !e.contains("response")) {
                    throw Error(examples.string() + ": example needs 'response'");
                }
                list.push_back({e.value("situation", std::string()), e.at("response")});
            }
        }
        assets.examples_[m] = std::move(list);
    }
    return assets;
}

std::string PromptAssets::default_dir() {
    if (const char* env = std::getenv("ARQ_ENGINE_ASSETS")) return env;
    return ARQ_ASSET_DIR;
}

const PromptAssets& PromptAssets::defaults() {
    static const PromptAssets assets = load(default_dir());
    return assets;
}

const std::string& PromptAssets::prompt_template(Module module) const {
    auto it = templates_.find(module);
    if (it == templates_.end()) throw Error("no prompt template for " + to_string(module));
    return it->second;
}

const std::vector<PromptExample>& PromptAssets::examples(Module module) const {
    static const std::vector<PromptExample> none;
    auto it = examples_.find(module);
    return it == examples_.end() ? none : it->second;
}

std::string PromptAssets::render_examples(Module module, const ReasoningBlueprint& bp) const {
    const auto& list = examples(module);
    if (list.empty()) return "(no examples)";
    std::string out;
    for (std::size_t i = 0; i < list.size(); ++i) {
        const Json shown = bp.mode == ReasoningMode::Arq ? list[i].response : project_answers(bp, list[i].response);
        if (i) out += "\n";
        out += "Example #" + std::to_string(i + 1);
        if (!list[i].situation.empty()) out += " - " + list[i].situation;
        out += ":\n```json\n" + shown.dump(4) + "\n```\n";
    }
    return out;
}

std::string render_glossary(const AgentDefinition& def) {
    if (def.glossary.empty()) return "(none)";
    std::string out;
    for (const auto& t : def.glossary) out += "- " + t.term + ": " + t.definition + "\n";
    return out;
}

std::string render_event(const Event& event) {
    return std::visit(
        [](const auto& e) -> std::string {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, CustomerMessage>) {
                return "[customer]: " + e.text;
            } else if constexpr (std::is_same_v<T, AgentMessage>) {
                return "[agent]: " + e.text;
            } else {
                return "[tool result] " + e.tool + "(" + e.canonical_args + ") -> " + canonical_json(e.result);
            }
        },
        event);
}

std::string render_history(const std::vector<Event>& events) {
    if (events.empty()) return "(no events)";
    std::string out;
    for (const auto& e : events) out += render_event(e) + "\n";
    return out;
}

std::string render_staged_calls(const std::vector<ToolResult>& staged) {
    if (staged.empty()) return "(none)";
    std::string out;
    for (const auto& c : staged) out += render_event(c) + "\n";
    return out;
}

std::string render_tool(const ToolDescriptor& tool) {
    std::string out = "name: " + tool.name + "\ndescription: " + tool.description + "\nparameters:\n";
    if (tool.parameters.empty()) out += "    (none)\n";
    for (const auto& p : tool.parameters) {
        out += "    - " + p.name + " (" + to_string(p.type);
        if (p.type == ParamType::Enum) {
            out += ": ";
            for (std::size_t i = 0; i < p.enum_values.size(); ++i) out += (i ? " | " : "") + p.enum_values[i];
        }
        out += std::string(p.required ? ", required" : ", optional") + "): " + p.description + "\n";
    }
    return out;
}

std::string render_guideline(const Guideline& g) {
    return "Guideline id: " + g.id + "\n    condition: " + g.condition + "\n    action: " + g.action + "\n";
}

}  // namespace arq
