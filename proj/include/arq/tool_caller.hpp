#pragma once

#include "arq/agent.hpp"
#include "arq/blueprint.hpp"
#include "arq/gateway.hpp"
#include "arq/guideline_proposer.hpp"
#include "arq/prompt_assets.hpp"
#include "arq/session.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace arq {

struct ArgumentEvaluation {
    std::optional<Json> value;  // absent when the model could not determine it
    std::string evaluation;
    Json details = Json::object();  // the full per-argument record as completed

    friend bool operator==(const ArgumentEvaluation&, const ArgumentEvaluation&) = default;
};

/// One proposed call of a candidate tool.
struct ToolCallDecision {
    std::string tool_name;
    std::string applicability_rationale;
    int applicability_score = 1;
    std::optional<std::map<std::string, ArgumentEvaluation>> argument_evaluations;
    bool same_call_is_already_staged = false;
    std::string comparison_with_rejected;
    std::string relevant_subtleties;
    bool better_rejected_exists = false;
    std::optional<std::string> better_rejected_name;
    std::optional<std::string> better_rejected_rationale;
    std::optional<bool> run_in_tandem;
    bool should_run = false;
    int iteration = 1;  // turn-loop pass that produced the decision

    /// Parameter -> value for every evaluated argument that carries a value.
    Json arguments() const;

    friend bool operator==(const ToolCallDecision&, const ToolCallDecision&) = default;
};

Json to_json(const ToolCallDecision& d);

/// Decisions from one tool-caller completion (one per tool_calls entry).
std::vector<ToolCallDecision> tool_call_decisions_from_json(const Json& completion, int iteration);

inline constexpr int kRunThreshold = 5;

struct ExecutionVerdict {
    enum class Action { Execute, Skip };
    Action action = Action::Skip;
    std::string reason;  // "" | model-declined | below-threshold | invalid-arguments | duplicate
    std::string detail;

    bool execute() const { return action == Action::Execute; }
    static ExecutionVerdict run() { return {Action::Execute, "", ""}; }
    static ExecutionVerdict skip(std::string reason, std::string detail = "") {
        return {Action::Skip, std::move(reason), std::move(detail)};
    }
    friend bool operator==(const ExecutionVerdict&, const ExecutionVerdict&) = default;
};

Json to_json(const ExecutionVerdict& v);

struct ExecutionPolicy {
    // Lets a later-iteration decision that knowingly repeats a staged call
    // run again. Off unless configured.
    bool allow_justified_reexecution = false;
};

/// Checks arguments against the tool's parameter list. Returns one message
/// per problem; empty means valid.
std::vector<std::string> validate_arguments(const Json& args, const ToolDescriptor& tool);

/// Pure gate between a model decision and an actual execution.
/// executed: calls already executed this turn.
ExecutionVerdict decide_execution(const ToolCallDecision& d, const ToolDescriptor& tool,
                                  const std::vector<ToolResult>& executed, const ExecutionPolicy& policy = {});

class UnknownToolError : public Error {
public:
    explicit UnknownToolError(const std::string& name) : Error("unknown tool " + name) {}
};

/// Tool bindings by name. Scripted bindings answer from canned results;
/// HTTP bindings POST the canonical arguments to their endpoint.
class ToolRegistry {
public:
    ToolRegistry() = default;
    explicit ToolRegistry(const std::vector<ToolDescriptor>& tools);

    void add(const ToolDescriptor& tool);
    bool contains(const std::string& name) const;

    /// Transport and binding failures are returned as {"error": ...} payloads.
    /// Throws UnknownToolError for names not in the registry.
    ToolResult execute(const std::string& name, const Json& args) const;

private:
    std::map<std::string, ToolDescriptor> tools_;
};

/// Runs approved decisions in order; results come back in the same order.
std::vector<ToolResult> execute_tools(const std::vector<ToolCallDecision>& decisions, const ToolRegistry& registry);

/// Tools attached to at least one active guideline, in agent tool order.
std::vector<const ToolDescriptor*> candidate_tools(const AgentDefinition& def,
                                                   const std::vector<std::string>& active_ids);

struct ToolCallerConfig {
    ModuleSettings settings = default_settings(Module::ToolCaller);
    int max_repairs = kDefaultMaxRepairs;
    std::optional<ReasoningBlueprint> arq_blueprint;
    const PromptAssets* assets = nullptr;
};

struct ToolInferenceCall {
    std::string tool_name;
    Json completion;
    Usage usage;
};

struct ToolInferenceFailure {
    std::string tool_name;
    std::string error;
    std::vector<Violation> violations;
    Usage usage;
};

struct ToolCallerResult {
    std::vector<ToolCallDecision> decisions;  // candidate order, then tool_calls order
    std::vector<ToolInferenceCall> calls;
    std::vector<ToolInferenceFailure> failures;

    bool ok() const { return failures.empty(); }
};

std::string build_tool_caller_prompt(const Session& session, const AgentDefinition& def,
                                     const std::vector<std::string>& active_ids,
                                     const std::vector<ToolResult>& staged, const ToolDescriptor& candidate,
                                     const std::vector<const ToolDescriptor*>& candidates,
                                     const ReasoningBlueprint& bp, const PromptAssets& assets);

/// One structured completion per candidate tool.
ToolCallerResult infer_tool_calls(const Session& session, const AgentDefinition& def,
                                  const std::vector<std::string>& active_ids, const std::vector<ToolResult>& staged,
                                  ReasoningMode mode, CompletionBackend& backend, int iteration = 1,
                                  const ToolCallerConfig& config = {});

}  // namespace arq
