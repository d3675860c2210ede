#pragma once

#include "arq/blueprint.hpp"

#include <string>
#include <string_view>

namespace arq {

enum class Module { Proposer, ToolCaller, MessageGenerator, Judge };

std::string to_string(Module module);
Module module_from(std::string_view text);

/// The shipped reasoning blueprint for a pipeline module. ARQ mode returns
/// the full attentive-query schema; CoT and Direct return the same answer
/// keys with all non-answer queries pruned.
ReasoningBlueprint builtin_blueprint(Module module, ReasoningMode mode);

/// Answer keys a custom blueprint must keep for the module's extractor.
const std::vector<std::string>& required_answer_keys(Module module);

namespace keys {
// Guideline proposer.
inline constexpr const char* kChecks = "checks";
inline constexpr const char* kGuidelineId = "guideline_id";
inline constexpr const char* kCondition = "condition";
inline constexpr const char* kConditionRationale = "condition_application_rationale";
inline constexpr const char* kConditionApplies = "condition_applies";
inline constexpr const char* kAction = "action";
inline constexpr const char* kIsContinuous = "guideline_is_continuous";
inline constexpr const char* kCapitalize =
    "capitalize_exact_words_from_action_in_the_explanations_to_avoid_semantic_pitfalls";
inline constexpr const char* kPreviouslyAppliedRationale = "guideline_previously_applied_rationale";
inline constexpr const char* kNewContext =
    "guideline_current_application_refers_to_a_new_or_subtly_different_context_or_information";
inline constexpr const char* kPreviouslyApplied = "guideline_previously_applied";
inline constexpr const char* kMissingPart = "is_missing_part_cosmetic_or_functional";
inline constexpr const char* kShouldReapply = "guideline_should_reapply";
inline constexpr const char* kAppliesScore = "applies_score";

// Tool caller.
inline constexpr const char* kLastCustomerMessage = "last_customer_message";
inline constexpr const char* kInquiry = "most_recent_customer_inquiry_or_need";
inline constexpr const char* kInquiryResolved = "most_recent_customer_inquiry_or_need_was_already_resolved";
inline constexpr const char* kToolName = "name";
inline constexpr const char* kSubtleties = "subtleties_to_be_aware_of";
inline constexpr const char* kToolCalls = "tool_calls_for_candidate_tool";
inline constexpr const char* kApplicabilityRationale = "applicability_rationale";
inline constexpr const char* kApplicabilityScore = "applicability_score";
inline constexpr const char* kArgumentEvaluations = "argument_evaluations";
inline constexpr const char* kArgEvaluation = "evaluation";
inline constexpr const char* kArgInContext = "is_it_provided_in_the_current_context";
inline constexpr const char* kArgFromCustomer = "should_it_principally_be_provided_by_the_customer";
inline constexpr const char* kArgProvidedAgain = "was_it_already_provided_and_does_it_need_to_be_provided_again";
inline constexpr const char* kArgProblematicGuess = "would_it_be_problematic_to_guess_the_value_if_not_provided";
inline constexpr const char* kArgValue = "value";
inline constexpr const char* kAlreadyStaged = "same_call_is_already_staged";
inline constexpr const char* kComparison = "comparison_with_rejected_tools_including_references_to_subtleties";
inline constexpr const char* kRelevantSubtleties = "relevant_subtleties";
inline constexpr const char* kBetterRejected = "a_rejected_tool_would_have_been_a_better_fit_if_it_werent_already_rejected";
inline constexpr const char* kBetterRejectedName = "potentially_better_rejected_tool_name";
inline constexpr const char* kBetterRejectedRationale = "potentially_better_rejected_tool_rationale";
inline constexpr const char* kRunInTandem = "the_better_rejected_tool_should_clearly_be_run_in_tandem_with_the_candidate_tool";
inline constexpr const char* kShouldRun = "should_run";

// Message generator.
inline constexpr const char* kLastMessageOfCustomer = "last_message_of_customer";
inline constexpr const char* kGuidelines = "guidelines";
inline constexpr const char* kContextEvaluation = "context_evaluation";
inline constexpr const char* kCtxNeeds = "most_recent_customer_inquiries_or_needs";
inline constexpr const char* kCtxParts =
    "parts_of_the_context_i_have_here_if_any_with_specific_information_on_how_to_address_these_needs";
inline constexpr const char* kCtxTopics = "topics_for_which_i_have_sufficient_information_and_can_therefore_help_with";
inline constexpr const char* kCtxMissing =
    "what_i_do_not_have_enough_information_to_help_with_with_based_on_the_provided_information_that_i_have";
inline constexpr const char* kCtxGivenInfo = "was_i_given_specific_information_here_on_how_to_address_some_of_these_specific_needs";
inline constexpr const char* kCtxTellCannot = "should_i_tell_the_customer_i_cannot_help_with_some_of_those_needs";
inline constexpr const char* kInsights = "insights";
inline constexpr const char* kInstructionEvaluations = "evaluation_for_each_instruction";
inline constexpr const char* kRevisions = "revisions";
inline constexpr const char* kRevisionNumber = "revision_number";
inline constexpr const char* kContent = "content";
inline constexpr const char* kFacts = "factual_information_provided";
inline constexpr const char* kServices = "offered_services";
inline constexpr const char* kSourceBased = "is_source_based_in_this_prompt";
inline constexpr const char* kInstructionsFollowed = "instructions_followed";
inline constexpr const char* kInstructionsBroken = "instructions_broken";
inline constexpr const char* kIsRepeat = "is_repeat_message";
inline constexpr const char* kFollowedAll = "followed_all_instructions";
inline constexpr const char* kBrokenMissingData = "instructions_broken_due_to_missing_data";
inline constexpr const char* kMissingDataRationale = "missing_data_rationale";
inline constexpr const char* kBrokenPrioritization = "instructions_broken_only_due_to_prioritization";
inline constexpr const char* kPrioritizationRationale = "prioritization_rationale";
inline constexpr const char* kAllSourced = "all_facts_and_services_sourced_from_prompt";
inline constexpr const char* kFurtherRevisions = "further_revisions_required";

// Judge.
inline constexpr const char* kQuotedEvidence = "quoted_evidence";
inline constexpr const char* kCriterionSatisfied = "criterion_satisfied";
}  // namespace keys

inline constexpr int kMaxRevisions = 5;
inline constexpr int kMaxInsights = 3;

}  // namespace arq
