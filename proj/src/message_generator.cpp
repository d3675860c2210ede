#include "arq/message_generator.hpp"

#include <algorithm>

namespace arq {

using namespace keys;

namespace {

Json to_json(const SourcedItem& s, const char* statement_key) {
    return {{statement_key, s.statement}, {"source", s.source}, {kSourceBased, s.is_source_based_in_prompt}};
}

std::vector<SourcedItem> sourced_from_json(const Json& list, const char* statement_key) {
    std::vector<SourcedItem> out;
    for (const auto& e : list) {
        out.push_back({e.value(statement_key, std::string()), e.value("source", std::string()),
                       e.value(kSourceBased, true)});
    }
    return out;
}

std::vector<std::string> strings(const Json& obj, const char* key) {
    std::vector<std::string> out;
    if (!obj.contains(key)) return out;
    for (const auto& s : obj.at(key)) out.push_back(s.get<std::string>());
    return out;
}

}  // namespace

Json to_json(const Revision& r) {
    Json facts = Json::array();
    for (const auto& f : r.factual_information_provided) facts.push_back(to_json(f, "fact"));
    Json services = Json::array();
    for (const auto& s : r.offered_services) services.push_back(to_json(s, "service"));
    Json j = {{kRevisionNumber, r.revision_number},
              {kContent, r.content},
              {kFacts, facts},
              {kServices, services},
              {kInstructionsFollowed, r.instructions_followed},
              {kInstructionsBroken, r.instructions_broken},
              {kIsRepeat, r.is_repeat_message},
              {kFollowedAll, r.followed_all_instructions},
              {kAllSourced, r.all_facts_and_services_sourced_from_prompt},
              {kFurtherRevisions, r.further_revisions_required}};
    if (r.broken_due_to_missing_data) j[kBrokenMissingData] = *r.broken_due_to_missing_data;
    if (r.missing_data_rationale) j[kMissingDataRationale] = *r.missing_data_rationale;
    if (r.broken_only_due_to_prioritization) j[kBrokenPrioritization] = *r.broken_only_due_to_prioritization;
    if (r.prioritization_rationale) j[kPrioritizationRationale] = *r.prioritization_rationale;
    return j;
}

Json to_json(const MessageTrace& t) {
    Json revisions = Json::array();
    for (const auto& r : t.revisions) revisions.push_back(to_json(r));
    Json evals = Json::array();
    for (const auto& e : t.evaluation_for_each_instruction) {
        evals.push_back({{"number", e.number},
                         {"instruction", e.instruction},
                         {"evaluation", e.evaluation},
                         {"data_available", e.data_available}});
    }
    Json j = {{kLastMessageOfCustomer, t.last_message_of_customer},
              {kGuidelines, t.guidelines},
              {kInsights, t.insights},
              {kInstructionEvaluations, evals},
              {kRevisions, revisions},
              {"hallucination_risk", t.hallucination_risk},
              {"repeat_detected", t.repeat_detected},
              {"malformed_revision_sequence", t.malformed_revision_sequence},
              {"reprompted", t.reprompted},
              {"warnings", t.warnings}};
    if (t.context_evaluation) {
        const auto& c = *t.context_evaluation;
        j[kContextEvaluation] = {{kCtxNeeds, c.customer_needs},
                                 {kCtxParts, c.relevant_context},
                                 {kCtxTopics, c.sufficient_topics},
                                 {kCtxMissing, c.insufficient_topics},
                                 {kCtxGivenInfo, c.given_specific_information},
                                 {kCtxTellCannot, c.should_tell_cannot_help}};
    }
    return j;
}

MessageTrace message_trace_from_json(const Json& c) {
    MessageTrace t;
    t.last_message_of_customer = c.value(kLastMessageOfCustomer, std::string());
    t.guidelines = strings(c, kGuidelines);
    if (c.contains(kContextEvaluation)) {
        const Json& e = c.at(kContextEvaluation);
        t.context_evaluation = ContextEvaluation{e.value(kCtxNeeds, std::string()),  e.value(kCtxParts, std::string()),
                                                 e.value(kCtxTopics, std::string()), e.value(kCtxMissing, std::string()),
                                                 e.value(kCtxGivenInfo, false),      e.value(kCtxTellCannot, false)};
    }
    t.insights = strings(c, kInsights);
    if (c.contains(kInstructionEvaluations)) {
        for (const auto& e : c.at(kInstructionEvaluations)) {
            t.evaluation_for_each_instruction.push_back({e.value("number", 1), e.value("instruction", std::string()),
                                                         e.value("evaluation", std::string()),
                                                         e.value("data_available", std::string())});
        }
    }
    int position = 0;
    for (const auto& e : c.at(kRevisions)) {
        ++position;
        Revision r;
        // Degenerate modes only ask for content; number revisions by position.
        r.revision_number = e.value(kRevisionNumber, position);
        r.content = e.at(kContent).get<std::string>();
        if (e.contains(kFacts)) r.factual_information_provided = sourced_from_json(e.at(kFacts), "fact");
        if (e.contains(kServices)) r.offered_services = sourced_from_json(e.at(kServices), "service");
        r.instructions_followed = strings(e, kInstructionsFollowed);
        r.instructions_broken = strings(e, kInstructionsBroken);
        r.is_repeat_message = e.value(kIsRepeat, false);
        r.followed_all_instructions = e.value(kFollowedAll, true);
        if (e.contains(kBrokenMissingData)) r.broken_due_to_missing_data = e.at(kBrokenMissingData).get<bool>();
        if (e.contains(kMissingDataRationale)) r.missing_data_rationale = e.at(kMissingDataRationale).get<std::string>();
        if (e.contains(kBrokenPrioritization)) {
            r.broken_only_due_to_prioritization = e.at(kBrokenPrioritization).get<bool>();
        }
        if (e.contains(kPrioritizationRationale)) {
            r.prioritization_rationale = e.at(kPrioritizationRationale).get<std::string>();
        }
        r.all_facts_and_services_sourced_from_prompt = e.value(kAllSourced, true);
        r.further_revisions_required = e.value(kFurtherRevisions, false);
        t.revisions.push_back(std::move(r));
    }
    return t;
}

std::string select_final_revision(const std::vector<Revision>& revisions) {
    if (revisions.empty()) throw EmptyRevisionsError();
    return revisions.back().content;
}

RevisionStep needs_further_revision(const Revision& r, int count) {
    if (!r.further_revisions_required || count >= kMaxRevisions) return RevisionStep::Stop;
    return RevisionStep::Continue;
}

std::vector<std::string> revision_sequence_warnings(const std::vector<Revision>& revisions) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < revisions.size(); ++i) {
        const auto& r = revisions[i];
        if (i > 0 && r.revision_number <= revisions[i - 1].revision_number) {
            out.push_back("revision_number " + std::to_string(r.revision_number) + " does not increase");
        }
        if (i + 1 < revisions.size() && !r.further_revisions_required) {
            out.push_back("revision " + std::to_string(r.revision_number) +
                          " is followed by another revision but does not require further revisions");
        }
    }
    return out;
}

namespace {

std::string render_active_guidelines(const AgentDefinition& def, const std::vector<GuidelineMatch>& active) {
    if (active.empty()) return "(none)";
    std::string out;
    int n = 0;
    for (const auto& m : active) {
        const Guideline* g = def.find_guideline(m.guideline_id);
        if (!g) continue;
        out += "Guideline #" + std::to_string(++n) + ") When " + g->condition + ", then " + g->action + "\n";
        out += "    [applies_score: " + std::to_string(m.applies_score) + "]";
        if (!m.condition_application_rationale.empty()) out += " " + m.condition_application_rationale;
        out += "\n";
    }
    return out;
}

std::string render_tool_results(const Session& session, const std::vector<ToolResult>& staged) {
    std::string out;
    for (const auto& e : session.events) {
        if (std::holds_alternative<ToolResult>(e)) out += render_event(e) + "\n";
    }
    for (const auto& c : staged) out += render_event(c) + "\n";
    return out.empty() ? "(none)" : out;
}

std::string reprompt_message(int revisions_so_far, const std::string& previous) {
    return "\n\nYOUR PREVIOUS RESPONSE:\n" + previous +
           "\n\nIts final revision still requires further revision. Produce the complete JSON object again, "
           "keeping the revisions so far and adding new revisions until one no longer requires revision. Use at "
           "most " +
           std::to_string(kMaxRevisions) + " revisions in total (you have used " + std::to_string(revisions_so_far) +
           ").\n";
}

void audit(MessageTrace& trace, const std::string& text, const Session& session) {
    const auto warnings = revision_sequence_warnings(trace.revisions);
    trace.malformed_revision_sequence = !warnings.empty();
    trace.warnings.insert(trace.warnings.end(), warnings.begin(), warnings.end());
    const Revision& last = trace.revisions.back();
    auto unsourced = [](const SourcedItem& s) { return !s.is_source_based_in_prompt; };
    trace.hallucination_risk =
        std::any_of(last.factual_information_provided.begin(), last.factual_information_provided.end(), unsourced) ||
        std::any_of(last.offered_services.begin(), last.offered_services.end(), unsourced);
    const auto prior = prior_agent_messages(session);
    trace.repeat_detected = std::find(prior.begin(), prior.end(), text) != prior.end();
}

}  // namespace

std::string build_message_prompt(const Session& session, const AgentDefinition& def,
                                 const std::vector<GuidelineMatch>& active, const std::vector<ToolResult>& staged,
                                 const ReasoningBlueprint& bp, const PromptAssets& assets) {
    return render_prompt_template(assets.prompt_template(Module::MessageGenerator),
                                  {{"agent_profile", def.profile.empty() ? "(none)" : def.profile},
                                   {"glossary", render_glossary(def)},
                                   {"interaction_history", render_history(session.events)},
                                   {"active_guidelines", render_active_guidelines(def, active)},
                                   {"tool_results", render_tool_results(session, staged)},
                                   {"examples", assets.render_examples(Module::MessageGenerator, bp)},
                                   {"output_format", render_schema_instruction(bp)}});
}

GenerationResult generate_message(const Session& session, const AgentDefinition& def,
                                  const std::vector<GuidelineMatch>& active, const std::vector<ToolResult>& staged,
                                  ReasoningMode mode, CompletionBackend& backend,
                                  const MessageGeneratorConfig& config) {
    const PromptAssets& assets = config.assets ? *config.assets : PromptAssets::defaults();
    const ReasoningBlueprint bp = config.arq_blueprint ? degenerate_blueprint(*config.arq_blueprint, mode)
                                                       : builtin_blueprint(Module::MessageGenerator, mode);
    const std::string prompt = build_message_prompt(session, def, active, staged, bp, assets);

    GenerationResult out;
    StructuredResult first = complete_structured(backend, bp, make_request(config.settings, prompt), config.max_repairs);
    out.calls.push_back({first.completion.object, first.usage});
    out.trace = message_trace_from_json(first.completion.object);
    if (out.trace.revisions.empty()) throw EmptyRevisionsError();
    for (const auto& w : first.completion.warnings) out.trace.warnings.push_back(w);

    const int count = static_cast<int>(out.trace.revisions.size());
    if (config.reprompt_unfinished && mode == ReasoningMode::Arq &&
        needs_further_revision(out.trace.revisions.back(), count) == RevisionStep::Continue) {
        out.trace.reprompted = true;
        try {
            StructuredResult second =
                complete_structured(backend, bp, make_request(config.settings, prompt + reprompt_message(count, first.completion.raw_text)), 0);
            out.calls.push_back({second.completion.object, second.usage});
            MessageTrace next = message_trace_from_json(second.completion.object);
            if (next.revisions.size() > out.trace.revisions.size()) {
                next.reprompted = true;
                out.trace = std::move(next);
            } else {
                out.trace.warnings.push_back("re-prompt did not add revisions; kept the original completion");
            }
        } catch (const StructuredCompletionError& e) {
            out.calls.push_back({Json(), e.usage()});
            out.trace.warnings.push_back(std::string("re-prompt failed: ") + e.what());
        }
    }

    out.text = select_final_revision(out.trace.revisions);
    audit(out.trace, out.text, session);
    return out;
}

}  // namespace arq
