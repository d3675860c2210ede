#pragma once

#include "arq/agent.hpp"
#include "arq/builtin_blueprints.hpp"
#include "arq/gateway.hpp"
#include "arq/session.hpp"

#include <string>
#include <vector>

namespace arq::testing {

inline std::string source_path(const std::string& rel) { return std::string(ARQ_SOURCE_DIR) + "/" + rel; }

inline Guideline guideline(std::string id, std::string condition, std::string action,
                           std::vector<std::string> tools = {}) {
    return {std::move(id), std::move(condition), std::move(action), std::move(tools)};
}

/// One entry of the proposer's "checks" list in full ARQ form.
inline Json proposer_check(const Guideline& g, bool applies, int score, const std::string& prev = "no",
                           std::optional<bool> reapply = std::nullopt) {
    Json c = {{keys::kGuidelineId, g.id},
              {keys::kCondition, g.condition},
              {keys::kConditionRationale, "rationale for " + g.id},
              {keys::kConditionApplies, applies},
              {keys::kAction, g.action},
              {keys::kCapitalize, true},
              {keys::kPreviouslyAppliedRationale, {{g.action, "not done yet"}}},
              {keys::kPreviouslyApplied, prev},
              {keys::kAppliesScore, score}};
    if (prev != "no") c[keys::kNewContext] = "context";
    if (prev == "partially") c[keys::kMissingPart] = "functional";
    if (reapply) c[keys::kShouldReapply] = *reapply;
    return c;
}

inline Json proposer_completion(const std::vector<Json>& checks) { return {{keys::kChecks, checks}}; }

inline Json tool_call(int score, bool should_run, const Json& args = Json::object(), bool staged = false) {
    Json evals = Json::object();
    for (auto it = args.begin(); it != args.end(); ++it) {
        evals[it.key()] = {{"evaluation", "given"},
                           {"is_it_provided_in_the_current_context", true},
                           {"should_it_principally_be_provided_by_the_customer", true},
                           {"was_it_already_provided_and_does_it_need_to_be_provided_again", false},
                           {"would_it_be_problematic_to_guess_the_value_if_not_provided", true},
                           {"value", it.value()}};
    }
    return {{"applicability_rationale", "needed"},
            {"applicability_score", score},
            {"argument_evaluations", evals},
            {"same_call_is_already_staged", staged},
            {"comparison_with_rejected_tools_including_references_to_subtleties", "none"},
            {"relevant_subtleties", "none"},
            {"a_rejected_tool_would_have_been_a_better_fit_if_it_werent_already_rejected", false},
            {"should_run", should_run}};
}

inline Json tool_completion(const std::string& name, const std::vector<Json>& calls) {
    return {{"last_customer_message", "msg"},
            {"most_recent_customer_inquiry_or_need", "need"},
            {"most_recent_customer_inquiry_or_need_was_already_resolved", false},
            {"name", name},
            {"subtleties_to_be_aware_of", "none"},
            {"tool_calls_for_candidate_tool", calls}};
}

inline Json sourced(const std::string& field, const std::string& text, bool ok = true) {
    return {{field, text}, {"source", "profile"}, {"is_source_based_in_this_prompt", ok}};
}

inline Json revision(int n, const std::string& content, bool further = false, std::vector<Json> facts = {},
                     std::vector<Json> services = {}) {
    return {{"revision_number", n},
            {"content", content},
            {"factual_information_provided", facts},
            {"offered_services", services},
            {"instructions_followed", Json::array()},
            {"instructions_broken", Json::array()},
            {"is_repeat_message", false},
            {"followed_all_instructions", true},
            {"all_facts_and_services_sourced_from_prompt", true},
            {"further_revisions_required", further}};
}

/// Revisions 1..n, all but the last asking for more work.
inline std::vector<Json> revision_chain(int n, const std::string& prefix = "draft ") {
    std::vector<Json> out;
    for (int i = 1; i <= n; ++i) out.push_back(revision(i, prefix + std::to_string(i), i < n));
    return out;
}

inline Json message_completion(const std::vector<Json>& revisions, const std::string& last = "hello") {
    return {{"last_message_of_customer", last},
            {"guidelines", Json::array()},
            {"context_evaluation",
             {{keys::kCtxNeeds, "needs"},
              {keys::kCtxParts, "parts"},
              {keys::kCtxTopics, "topics"},
              {keys::kCtxMissing, "nothing"},
              {keys::kCtxGivenInfo, true},
              {keys::kCtxTellCannot, false}}},
            {"insights", Json::array()},
            {"evaluation_for_each_instruction", Json::array()},
            {"revisions", revisions}};
}

inline ScriptEntry seq(const Json& response, std::optional<std::int64_t> tokens = std::nullopt) {
    ScriptEntry e;
    e.response_text = response.is_string() ? response.get<std::string>() : response.dump(2);
    e.output_tokens = tokens;
    return e;
}

inline ScriptEntry on(const std::string& substring, const Json& response) {
    ScriptEntry e = seq(response);
    e.match = ScriptEntry::Match::Substring;
    e.substring = substring;
    return e;
}

inline Session session_with(std::vector<Event> events) {
    Session s;
    s.id = "s";
    s.agent_id = "a";
    s.events = std::move(events);
    return s;
}

}  // namespace arq::testing
