#include "arq/builtin_blueprints.hpp"

namespace arq {

namespace {

using namespace keys;

ArqQuery q(std::string key, std::string instruction, Slot slot) {
    ArqQuery out;
    out.key = std::move(key);
    out.instruction = std::move(instruction);
    out.slot = std::move(slot);
    return out;
}

ArqQuery optional(ArqQuery query) {
    query.optional = true;
    return query;
}

ArqQuery required_if(ArqQuery query, std::string key, RequiredIf::Op op, std::vector<Json> values) {
    query.required_if = RequiredIf{std::move(key), op, std::move(values)};
    return query;
}

ReasoningBlueprint proposer() {
    ArqQuery capitalize = q(kCapitalize, "", Slot::boolean());
    capitalize.constant = true;

    std::vector<ArqQuery> check = {
        q(kGuidelineId, "the id of the guideline being evaluated", Slot::text()),
        q(kCondition, "the guideline's condition, repeated verbatim", Slot::text()),
        q(kConditionRationale, "Explanation for why the condition is or isn't met", Slot::text()),
        q(kConditionApplies, "BOOL", Slot::boolean()),
        q(kAction, "the guideline's action, repeated verbatim", Slot::text()),
        optional(q(kIsContinuous,
                   "BOOL: Optional, only necessary if guideline_previously_applied is true. Specifies whether "
                   "the action is taken one-time, or is continuous",
                   Slot::boolean())),
        capitalize,
        q(kPreviouslyAppliedRationale,
          "explanation of whether this action segment was already applied; to avoid pitfalls, try to use the "
          "exact same words here as the action segment to determine this. use CAPITALS to highlight the same "
          "words in the segment as in your explanation",
          Slot::map(Slot::text(), "action_segment_N")),
        optional(q(kNewContext,
                   "if the guideline DID previously apply, explain here whether or not it needs to re-apply due "
                   "to it being applicable to new context or information",
                   Slot::text())),
        q(kPreviouslyApplied,
          "str: either 'no', 'partially' or 'fully' depending on whether and to what degree the action was "
          "previously preformed",
          Slot::enumeration({"no", "partially", "fully"})),
        required_if(q(kMissingPart,
                      "str: only included if guideline_previously_applied is 'partially'. Value is either "
                      "'cosmetic' or 'functional' depending on the nature of the missing segment.",
                      Slot::enumeration({"cosmetic", "functional"})),
                    kPreviouslyApplied, RequiredIf::Op::Equals, {"partially"}),
        required_if(q(kShouldReapply, "BOOL: Optional, only necessary if guideline_previously_applied is not 'no'",
                      Slot::boolean()),
                    kPreviouslyApplied, RequiredIf::Op::NotEquals, {"no"}),
        q(kAppliesScore,
          "Relevance score of the guideline between 1 and 10. A higher score indicates that the guideline "
          "should be active",
          Slot::integer(1, 10)),
    };

    ReasoningBlueprint bp;
    bp.queries = {q(kChecks, "one entry per guideline, in the order the guidelines were given",
                    Slot::list(Slot::record(std::move(check)), 1))};
    const std::string prefix = std::string(kChecks) + ".";
    bp.answer_keys = {prefix + kGuidelineId, prefix + kPreviouslyApplied, prefix + kShouldReapply,
                      prefix + kAppliesScore};
    return bp;
}

ReasoningBlueprint tool_caller() {
    std::vector<ArqQuery> argument = {
        q(kArgEvaluation, "how the value for this parameter is determined from the interaction", Slot::text()),
        q(kArgInContext, "BOOL: is the parameter's value provided in the current context", Slot::boolean()),
        q(kArgFromCustomer, "BOOL: should this parameter principally be provided by the customer", Slot::boolean()),
        q(kArgProvidedAgain, "BOOL: was the parameter already provided, and does it need to be provided again",
          Slot::boolean()),
        q(kArgProblematicGuess, "BOOL: would it be problematic to guess the value if it was not provided",
          Slot::boolean()),
        optional(q(kArgValue, "the argument value, following the parameter's type; omit it if the value is missing",
                   Slot::any())),
    };

    std::vector<Json> runnable_scores;
    for (int s = 5; s <= 10; ++s) runnable_scores.emplace_back(s);

    std::vector<ArqQuery> call = {
        q(kApplicabilityRationale, "A FEW WORDS THAT EXPLAIN WHETHER AND HOW THE TOOL NEEDS TO BE CALLED",
          Slot::text()),
        q(kApplicabilityScore, "INTEGER FROM 1 TO 10", Slot::integer(1, 10)),
        required_if(q(kArgumentEvaluations,
                      "EVALUATIONS FOR THE ARGUMENTS. CAN BE DROPPED IF THE TOOL SHOULD NOT EXECUTE",
                      Slot::map(Slot::record(std::move(argument)), "PARAMETER NAME")),
                    kApplicabilityScore, RequiredIf::Op::Equals, std::move(runnable_scores)),
        q(kAlreadyStaged, "BOOL", Slot::boolean()),
        q(kComparison, "A VERY BRIEF OVERVIEW OF HOW THIS CALL FARES AGAINST OTHER TOOLS IN APPLICABILITY",
          Slot::text()),
        q(kRelevantSubtleties, "IF SUBTLETIES FOUND, REFER TO THE RELEVANT ONES HERE", Slot::text()),
        q(kBetterRejected, "BOOL", Slot::boolean()),
        required_if(q(kBetterRejectedName,
                      "IF CANDIDATE TOOL IS A WORSE FIT THAN A REJECTED TOOL, THIS IS THE NAME OF THAT REJECTED TOOL",
                      Slot::text()),
                    kBetterRejected, RequiredIf::Op::Equals, {true}),
        required_if(q(kBetterRejectedRationale,
                      "IF CANDIDATE TOOL IS A WORSE FIT THAN A REJECTED TOOL, THIS EXPLAINS WHY", Slot::text()),
                    kBetterRejected, RequiredIf::Op::Equals, {true}),
        required_if(q(kRunInTandem, "BOOL", Slot::boolean()), kBetterRejected, RequiredIf::Op::Equals, {true}),
        q(kShouldRun, "BOOL", Slot::boolean()),
    };

    ReasoningBlueprint bp;
    bp.queries = {
        q(kLastCustomerMessage, "REPEAT THE LAST USER MESSAGE IN THE INTERACTION", Slot::text()),
        q(kInquiry, "customer's inquiry or need", Slot::text()),
        q(kInquiryResolved, "BOOL", Slot::boolean()),
        q(kToolName, "TOOL NAME", Slot::text()),
        q(kSubtleties,
          "NOTE ANY SIGNIFICANT SUBTLETIES TO BE AWARE OF WHEN RUNNING THIS TOOL IN OUR AGENT'S CONTEXT",
          Slot::text()),
        q(kToolCalls, "one entry per distinct call of the candidate tool", Slot::list(Slot::record(std::move(call)), 1)),
    };
    const std::string prefix = std::string(kToolCalls) + ".";
    bp.answer_keys = {kToolName,
                      prefix + kApplicabilityScore,
                      prefix + kArgumentEvaluations + "." + kArgValue,
                      prefix + kAlreadyStaged,
                      prefix + kShouldRun};
    return bp;
}

ReasoningBlueprint message_generator() {
    auto sourced = [](const char* what) {
        return Slot::record({
            q(what, std::string("str, statement of a ") + (std::string(what) == "fact" ? "fact" : "service") +
                        " in the suggested response",
              Slot::text()),
            q("source", "str, source of the fact - either a specific part of this prompt or something else",
              Slot::text()),
            q(kSourceBased, "BOOL", Slot::boolean()),
        });
    };

    std::vector<ArqQuery> revision = {
        q(kRevisionNumber, "the number of this revision, starting at 1", Slot::integer(1, kMaxRevisions)),
        q(kContent, "response chosen after this revision", Slot::text()),
        q(kFacts, "every fact stated in the suggested response", Slot::list(sourced("fact"))),
        q(kServices, "every service offered in the suggested response", Slot::list(sourced("service"))),
        q(kInstructionsFollowed, "guidelines and insights that were followed", Slot::list(Slot::text())),
        q(kInstructionsBroken, "guidelines and insights that were broken", Slot::list(Slot::text())),
        q(kIsRepeat, "BOOL, indicating whether \"content\" is a repeat of a previous message by the agent",
          Slot::boolean()),
        q(kFollowedAll, "BOOL, whether all guidelines and insights followed", Slot::boolean()),
        optional(q(kBrokenMissingData,
                   "BOOL, optional. Necessary only if instructions_broken_only_due_to_prioritization is true",
                   Slot::boolean())),
        required_if(q(kMissingDataRationale,
                      "STR, optional. Necessary only if instructions_broken_due_to_missing_data is true", Slot::text()),
                    kBrokenMissingData, RequiredIf::Op::Equals, {true}),
        optional(q(kBrokenPrioritization, "BOOL, optional. Necessary only if followed_all_instructions is true",
                   Slot::boolean())),
        required_if(q(kPrioritizationRationale,
                      "STR, optional. Necessary only if instructions_broken_only_due_to_prioritization is true",
                      Slot::text()),
                    kBrokenPrioritization, RequiredIf::Op::Equals, {true}),
        q(kAllSourced, "BOOL, if false, you must produce further revisions", Slot::boolean()),
        q(kFurtherRevisions,
          "BOOL, true iff either instructions were broken due to invalid reasons, if is_repeat_message is true, "
          "or if all_facts_and_services_sourced_from_prompt is false",
          Slot::boolean()),
    };

    ReasoningBlueprint bp;
    bp.queries = {
        q(kLastMessageOfCustomer, "the customer's last message, repeated verbatim", Slot::text()),
        q(kGuidelines, "each active guideline given in this prompt, repeated by number", Slot::list(Slot::text())),
        q(kContextEvaluation, "",
          Slot::record({
              q(kCtxNeeds, "str, fill out accordingly", Slot::text()),
              q(kCtxParts, "fill out accordingly", Slot::text()),
              q(kCtxTopics, "fill out accordingly", Slot::text()),
              q(kCtxMissing, "fill out accordingly", Slot::text()),
              q(kCtxGivenInfo, "BOOL", Slot::boolean()),
              q(kCtxTellCannot, "BOOL", Slot::boolean()),
          })),
        q(kInsights, "Up to 3 original insights to adhere to", Slot::list(Slot::text(), 0, kMaxInsights)),
        q(kInstructionEvaluations, "one entry per insight",
          Slot::list(Slot::record({
              q("number", "the insight's number", Slot::integer(1, 1000)),
              q("instruction", "the insight", Slot::text()),
              q("evaluation", "your evaluation of how the insight should be followed", Slot::text()),
              q("data_available",
                "explanation whether you are provided with the required data to follow this insight now",
                Slot::text()),
          }))),
        q(kRevisions, "one entry per revision", Slot::list(Slot::record(std::move(revision)), 1, kMaxRevisions)),
    };
    bp.answer_keys = {std::string(kRevisions) + "." + kContent};
    return bp;
}

ReasoningBlueprint judge() {
    ReasoningBlueprint bp;
    bp.queries = {
        q(kQuotedEvidence,
          "quote, word for word, the parts of the agent's response that bear on the criterion; write 'none' if "
          "nothing does",
          Slot::text()),
        q(kCriterionSatisfied, "BOOL: whether the agent's response satisfies the criterion", Slot::boolean()),
    };
    bp.answer_keys = {kQuotedEvidence, kCriterionSatisfied};
    return bp;
}

}  // namespace

std::string to_string(Module module) {
    switch (module) {
    case Module::Proposer: return "guideline_proposer";
    case Module::ToolCaller: return "tool_caller";
    case Module::MessageGenerator: return "message_generator";
    case Module::Judge: return "judge";
    }
    return "guideline_proposer";
}

Module module_from(std::string_view text) {
    if (text == "guideline_proposer" || text == "proposer") return Module::Proposer;
    if (text == "tool_caller") return Module::ToolCaller;
    if (text == "message_generator") return Module::MessageGenerator;
    if (text == "judge") return Module::Judge;
    throw Error("unknown module '" + std::string(text) + "'");
}

ReasoningBlueprint builtin_blueprint(Module module, ReasoningMode mode) {
    ReasoningBlueprint arq;
    switch (module) {
    case Module::Proposer: arq = proposer(); break;
    case Module::ToolCaller: arq = tool_caller(); break;
    case Module::MessageGenerator: arq = message_generator(); break;
    case Module::Judge: arq = judge(); break;
    }
    return degenerate_blueprint(arq, mode);
}

const std::vector<std::string>& required_answer_keys(Module module) {
    static const std::vector<std::string> proposer_keys = builtin_blueprint(Module::Proposer, ReasoningMode::Arq).answer_keys;
    static const std::vector<std::string> tool_keys = builtin_blueprint(Module::ToolCaller, ReasoningMode::Arq).answer_keys;
    static const std::vector<std::string> message_keys =
        builtin_blueprint(Module::MessageGenerator, ReasoningMode::Arq).answer_keys;
    static const std::vector<std::string> judge_keys = builtin_blueprint(Module::Judge, ReasoningMode::Arq).answer_keys;
    switch (module) {
    case Module::Proposer: return proposer_keys;
    case Module::ToolCaller: return tool_keys;
    case Module::MessageGenerator: return message_keys;
    case Module::Judge: return judge_keys;
    }
    return proposer_keys;
}

}  // namespace arq
