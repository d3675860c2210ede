#pragma once

#include "arq/agent.hpp"
#include "arq/blueprint.hpp"
#include "arq/gateway.hpp"
#include "arq/guideline_proposer.hpp"
#include "arq/message_generator.hpp"
#include "arq/prompt_assets.hpp"
#include "arq/session.hpp"
#include "arq/store.hpp"
#include "arq/tool_caller.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace arq {

inline constexpr int kDefaultMaxIterations = 3;

struct EngineConfig {
    ReasoningMode mode = ReasoningMode::Arq;
    int max_iterations = kDefaultMaxIterations;
    std::size_t batch_size = kDefaultBatchSize;
    int max_repairs = kDefaultMaxRepairs;
    ModuleSettings proposer = default_settings(Module::Proposer);
    ModuleSettings tool_caller = default_settings(Module::ToolCaller);
    ModuleSettings message_generator = default_settings(Module::MessageGenerator);
    bool parallel_batches = false;
    bool reprompt_unfinished_revisions = false;
    bool allow_justified_reexecution = false;
};

/// Throws Error when a field is out of range.
void check_config(const EngineConfig& config);

/// Reads the optional keys mode, max_iterations, batch_size, max_repairs,
/// parallel_batches, reprompt_unfinished_revisions,
/// allow_justified_reexecution and modules.<module>.{model, temperature,
/// max_output_tokens}; everything else keeps its default.
EngineConfig engine_config_from_json(const Json& j);

/// Completion backends per pipeline module; they may share one instance.
struct EngineBackends {
    std::shared_ptr<CompletionBackend> proposer;
    std::shared_ptr<CompletionBackend> tool_caller;
    std::shared_ptr<CompletionBackend> message_generator;

    static EngineBackends shared(std::shared_ptr<CompletionBackend> backend) { return {backend, backend, backend}; }
};

struct ToolDecisionRecord {
    ToolCallDecision decision;
    ExecutionVerdict verdict;
};

struct IterationTrace {
    int index = 1;
    std::vector<ProposerCall> proposer_calls;
    std::vector<GuidelineMatch> matches;
    std::vector<std::string> active_ids;
    std::vector<ToolInferenceCall> tool_caller_calls;
    std::vector<ToolDecisionRecord> tool_decisions;
    std::vector<ToolResult> executed;
};

struct TurnTrace {
    std::string turn_id;
    ReasoningMode mode = ReasoningMode::Arq;
    std::vector<IterationTrace> iterations;
    std::string message;
    MessageTrace message_trace;
    std::vector<GenerationCall> message_calls;
    std::vector<std::pair<Module, Usage>> calls;  // every gateway call, in issue order
    std::map<std::string, Usage> usage_by_module;

    void record(Module module, const Usage& usage);
};

Json to_json(const IterationTrace& it);
Json to_json(const TurnTrace& trace);

/// Raised when a module cannot produce a usable result. The session is
/// left exactly as it was before the turn.
class TurnFailedError : public Error {
public:
    TurnFailedError(Module module, std::string message, Json details, std::map<std::string, Usage> usage);
    Module module() const { return module_; }
    const Json& details() const { return details_; }
    const std::map<std::string, Usage>& usage_by_module() const { return usage_; }

private:
    Module module_;
    Json details_;
    std::map<std::string, Usage> usage_;
};

class ConflictError : public Error {
public:
    using Error::Error;
};

struct TurnOutcome {
    std::string turn_id;
    AgentMessage agent_message;
    TurnTrace trace;
};

/**
 * Runs turns: customer message in, agent message out.
 *
 * Each turn alternates guideline proposition and tool calling until an
 * iteration executes no new tool call or max_iterations is reached, then
 * generates the reply from the final active guidelines and all calls
 * staged during the turn. Turns on one session are serialized; different
 * sessions run concurrently.
 */
class Engine {
public:
    Engine(std::shared_ptr<SessionStore> store, EngineBackends backends, EngineConfig config = {},
           const PromptAssets* assets = nullptr);

    const EngineConfig& config() const { return config_; }

    /// Validates and stores. Generates an id when none is given; throws
    /// ConflictError when the id is taken.
    std::string create_agent(const AgentDefinition& def, std::optional<std::string> id = std::nullopt);
    AgentDefinition get_agent(const std::string& id) const;

    /// New session, optionally seeded with prior events.
    std::string create_session(const std::string& agent_id, std::vector<Event> history = {});
    Session get_session(const std::string& id) const;
    /// Throws UnknownSessionError for unknown sessions or turns.
    Json get_trace(const std::string& session_id, const std::string& turn_id) const;

    TurnOutcome process_turn(const std::string& session_id, const std::string& text,
                             std::optional<ReasoningMode> mode = std::nullopt);

private:
    std::shared_ptr<std::mutex> session_lock(const std::string& id);
    std::string new_id(const std::string& prefix);

    std::shared_ptr<SessionStore> store_;
    EngineBackends backends_;
    EngineConfig config_;
    const PromptAssets* assets_;

    std::mutex locks_mutex_;
    std::map<std::string, std::shared_ptr<std::mutex>> session_locks_;
    std::mutex id_mutex_;
    std::mt19937_64 rng_;
};

/// Runs the turn loop on an in-memory session without persistence.
/// session must already end with the customer message of this turn.
TurnTrace run_turn(const Session& session, const AgentDefinition& def, const ToolRegistry& registry,
                   const EngineBackends& backends, const EngineConfig& config, ReasoningMode mode,
                   const std::string& turn_id, const PromptAssets* assets = nullptr);

}  // namespace arq
