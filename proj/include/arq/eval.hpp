#pragma once

#include "arq/agent.hpp"
#include "arq/engine.hpp"
#include "arq/gateway.hpp"
#include "arq/session.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace arq {

enum class ScenarioKind { GuidelineOnly, Comprehensive };

std::string to_string(ScenarioKind kind);
ScenarioKind scenario_kind_from(const std::string& text);

struct ToolFixture {
    std::string tool;
    std::string canonical_args;
    Json result;
};

/**
 * One evaluation case. history ends with the customer message under test.
 * scripts holds scripted-backend entries per reasoning mode ("arq", "cot",
 * "direct") and for the judge ("judge"); live runs ignore them.
 */
struct TestScenario {
    std::string id;
    ScenarioKind kind = ScenarioKind::GuidelineOnly;
    std::string description;
    AgentDefinition agent;
    std::vector<Event> history;
    std::set<std::string> expected_guideline_ids;
    std::vector<std::string> success_criteria;
    std::vector<ToolFixture> tool_fixtures;
    std::map<std::string, std::vector<ScriptEntry>> scripts;
    std::string source;  // file it was loaded from
};

class ScenarioError : public Error {
public:
    using Error::Error;
};

/// Parses and validates one scenario document. Errors name the source and field.
TestScenario scenario_from_json(const Json& j, const std::string& source);

/// A directory loads every *.json in name order; a file loads one scenario.
std::vector<TestScenario> load_scenarios(const std::string& path);

/// Agent with every fixture installed as a scripted result on its tool.
AgentDefinition agent_with_fixtures(const TestScenario& s);

/// Exact set equality; subsets and supersets fail.
bool score_guideline_scenario(const std::set<std::string>& proposed, const std::set<std::string>& expected);

struct CriterionResult {
    std::string criterion;
    bool satisfied = false;
    bool structural = false;  // decided from the trace, no judge call
    std::string rationale;
    std::string reason;  // "" or "judge-error"
    Usage usage;
};

/// Handles "tool:<name> invoked", "tool:<name> invoked with <json object>" and
/// "tool:<name> not invoked". Returns nullopt for other criteria.
std::optional<CriterionResult> check_structural_criterion(const std::string& criterion, const TurnTrace& trace,
                                                          const AgentDefinition& def);

std::string build_judge_prompt(const Session& session, const std::string& agent_response, const std::string& criterion,
                               const PromptAssets& assets);

/// Structural check first, otherwise one judge completion.
CriterionResult judge_criterion(const Session& session, const std::string& agent_response, const TurnTrace& trace,
                                const AgentDefinition& def, const std::string& criterion,
                                CompletionBackend& judge_backend,
                                const ModuleSettings& settings = default_settings(Module::Judge),
                                const PromptAssets* assets = nullptr);

struct RunResult {
    std::string scenario_id;
    ScenarioKind kind = ScenarioKind::GuidelineOnly;
    ReasoningMode mode = ReasoningMode::Arq;
    int repetition = 0;
    bool passed = false;
    std::string reason;
    std::vector<std::string> proposed_guideline_ids;
    std::vector<CriterionResult> criteria;
    std::string agent_message;
    bool hallucination_risk = false;
    std::vector<std::pair<Module, Usage>> calls;  // pipeline and judge gateway calls
};

Json to_json(const RunResult& r);

/// Supplies fresh backends for each repetition.
struct BackendProvider {
    std::function<EngineBackends(const TestScenario&, ReasoningMode)> pipeline;
    std::function<std::shared_ptr<CompletionBackend>(const TestScenario&)> judge;
};

/// Scripted backends built from each scenario's scripts; a missing script
/// yields a backend that fails every call.
BackendProvider scripted_provider();
/// One shared backend for every module and the judge.
BackendProvider shared_provider(std::shared_ptr<CompletionBackend> backend);

std::vector<RunResult> run_scenario(const TestScenario& s, ReasoningMode mode, int repetitions,
                                    const BackendProvider& backends, const EngineConfig& config = {},
                                    const PromptAssets* assets = nullptr);

struct EvalOptions {
    std::vector<ReasoningMode> modes = {ReasoningMode::Arq};
    int repetitions = 5;
    int parallelism = 4;
    EngineConfig config;
    const PromptAssets* assets = nullptr;
};

/// Results ordered by mode, then scenario, then repetition, whatever the parallelism.
std::vector<RunResult> run_evaluation(const std::vector<TestScenario>& scenarios, const BackendProvider& backends,
                                      const EvalOptions& options);

struct CategoryRate {
    std::int64_t count = 0;
    double rate = 0.0;  // percent
};

/// Count-weighted mean of category rates. Throws EmptyGroupError when all counts are zero.
double weighted_total_rate(const std::vector<CategoryRate>& categories);

enum class PassRule { Majority, All, Any };

PassRule pass_rule_from(const std::string& text);
std::string to_string(PassRule rule);
bool passes(PassRule rule, int passes, int runs);

struct KindStats {
    std::int64_t scenarios = 0;
    std::int64_t runs = 0;
    std::int64_t passes = 0;
    double rate() const;  // percent of runs
};

struct ScenarioSummary {
    std::string scenario_id;
    ScenarioKind kind = ScenarioKind::GuidelineOnly;
    int runs = 0;
    int passes = 0;
    bool passed = false;  // under the report's pass rule
    std::vector<std::string> failure_reasons;
};

struct ModeReport {
    ReasoningMode mode = ReasoningMode::Arq;
    std::map<ScenarioKind, KindStats> kinds;
    double total_rate = 0.0;
    std::map<std::string, UsageSummary> tokens_by_module;
    std::vector<ScenarioSummary> scenarios;  // id order
};

struct EvalReport {
    PassRule rule = PassRule::Majority;
    std::vector<ModeReport> modes;  // arq, cot, direct order

    bool all_passed() const;
};

/// Independent of the order of results.
EvalReport aggregate_report(const std::vector<RunResult>& results, PassRule rule = PassRule::Majority);

Json to_json(const EvalReport& report);
/// Success-rate table followed by the mean output tokens per module.
std::string render_report_table(const EvalReport& report);

}  // namespace arq
