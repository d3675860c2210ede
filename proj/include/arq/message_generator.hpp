#pragma once

#include "arq/agent.hpp"
#include "arq/blueprint.hpp"
#include "arq/gateway.hpp"
#include "arq/guideline_proposer.hpp"
#include "arq/prompt_assets.hpp"
#include "arq/session.hpp"

#include <optional>
#include <string>
#include <vector>

namespace arq {

struct SourcedItem {
    std::string statement;
    std::string source;
    bool is_source_based_in_prompt = true;

    friend bool operator==(const SourcedItem&, const SourcedItem&) = default;
};

struct Revision {
    int revision_number = 1;
    std::string content;
    std::vector<SourcedItem> factual_information_provided;
    std::vector<SourcedItem> offered_services;
    std::vector<std::string> instructions_followed;
    std::vector<std::string> instructions_broken;
    bool is_repeat_message = false;
    bool followed_all_instructions = true;
    std::optional<bool> broken_due_to_missing_data;
    std::optional<std::string> missing_data_rationale;
    std::optional<bool> broken_only_due_to_prioritization;
    std::optional<std::string> prioritization_rationale;
    bool all_facts_and_services_sourced_from_prompt = true;
    bool further_revisions_required = false;

    friend bool operator==(const Revision&, const Revision&) = default;
};

struct ContextEvaluation {
    std::string customer_needs;
    std::string relevant_context;
    std::string sufficient_topics;
    std::string insufficient_topics;
    bool given_specific_information = false;
    bool should_tell_cannot_help = false;

    friend bool operator==(const ContextEvaluation&, const ContextEvaluation&) = default;
};

struct InstructionEvaluation {
    int number = 1;
    std::string instruction;
    std::string evaluation;
    std::string data_available;

    friend bool operator==(const InstructionEvaluation&, const InstructionEvaluation&) = default;
};

struct MessageTrace {
    std::string last_message_of_customer;
    std::vector<std::string> guidelines;
    std::optional<ContextEvaluation> context_evaluation;
    std::vector<std::string> insights;
    std::vector<InstructionEvaluation> evaluation_for_each_instruction;
    std::vector<Revision> revisions;

    // Engine-side audit flags.
    bool hallucination_risk = false;           // a final-revision fact or service is not sourced
    bool repeat_detected = false;              // final text equals a prior agent message
    bool malformed_revision_sequence = false;  // see revision_sequence_warnings
    bool reprompted = false;
    std::vector<std::string> warnings;

    friend bool operator==(const MessageTrace&, const MessageTrace&) = default;
};

Json to_json(const Revision& r);
Json to_json(const MessageTrace& t);

/// Fills a trace from a message-generator completion (any mode).
MessageTrace message_trace_from_json(const Json& completion);

class EmptyRevisionsError : public Error {
public:
    EmptyRevisionsError() : Error("completion contains no revisions") {}
};

/// Content of the last revision. Throws EmptyRevisionsError on an empty list.
std::string select_final_revision(const std::vector<Revision>& revisions);

enum class RevisionStep { Continue, Stop };

/// Stop once a revision needs no further work or the revision budget is spent.
RevisionStep needs_further_revision(const Revision& r, int count);

/// Problems with the order and flags of a revision list (empty when well-formed).
std::vector<std::string> revision_sequence_warnings(const std::vector<Revision>& revisions);

struct MessageGeneratorConfig {
    ModuleSettings settings = default_settings(Module::MessageGenerator);
    int max_repairs = kDefaultMaxRepairs;
    // One extra call when the final revision still asks for more work.
    bool reprompt_unfinished = false;
    std::optional<ReasoningBlueprint> arq_blueprint;
    const PromptAssets* assets = nullptr;
};

struct GenerationCall {
    Json completion;
    Usage usage;
};

struct GenerationResult {
    std::string text;
    MessageTrace trace;
    std::vector<GenerationCall> calls;
};

std::string build_message_prompt(const Session& session, const AgentDefinition& def,
                                 const std::vector<GuidelineMatch>& active, const std::vector<ToolResult>& staged,
                                 const ReasoningBlueprint& bp, const PromptAssets& assets);

/// Throws StructuredCompletionError or EmptyRevisionsError when no usable
/// completion is obtained.
GenerationResult generate_message(const Session& session, const AgentDefinition& def,
                                  const std::vector<GuidelineMatch>& active, const std::vector<ToolResult>& staged,
                                  ReasoningMode mode, CompletionBackend& backend,
                                  const MessageGeneratorConfig& config = {});

}  // namespace arq
