#pragma once

#include "arq/agent.hpp"
#include "arq/blueprint.hpp"
#include "arq/builtin_blueprints.hpp"
#include "arq/session.hpp"

#include <map>
#include <string>
#include <vector>

namespace arq {

/// Replaces every {{name}} in text. Throws Error naming the placeholder when
/// a value is missing; surrounding whitespace inside the braces is ignored.
std::string render_prompt_template(const std::string& text, const std::map<std::string, std::string>& values);

/// One in-context example: a short situation description and the full
/// structured response the module should produce for it.
struct PromptExample {
    std::string situation;
    Json response;
};

/**
 * Editable prompt assets loaded from a directory:
 *
 *   prompts/<module>.txt     module prompt template with {{placeholders}}
 *   examples/<module>.json   in-context examples: [{"situation", "response"}]
 *
 * Examples hold full ARQ responses; CoT and Direct prompts show only their
 * answer-key projection so all three modes share the same exemplars.
 */
class PromptAssets {
public:
    static PromptAssets load(const std::string& dir);
    /// ARQ_ENGINE_ASSETS when set, otherwise the asset directory of the source tree.
    static std::string default_dir();
    static const PromptAssets& defaults();

    const std::string& prompt_template(Module module) const;
    const std::vector<PromptExample>& examples(Module module) const;

    /// Examples rendered for a mode against the module's blueprint.
    std::string render_examples(Module module, const ReasoningBlueprint& bp) const;

private:
    std::map<Module, std::string> templates_;
    std::map<Module, std::vector<PromptExample>> examples_;
};

// Shared prompt sections.
std::string render_glossary(const AgentDefinition& def);
std::string render_event(const Event& event);
std::string render_history(const std::vector<Event>& events);
std::string render_staged_calls(const std::vector<ToolResult>& staged);
std::string render_tool(const ToolDescriptor& tool);
std::string render_guideline(const Guideline& g);

}  // namespace arq
