#include "arq/guideline_proposer.hpp"

#include <future>
#include <set>

namespace arq {

using namespace keys;

std::string to_string(PriorApplication p) {
    switch (p) {
    case PriorApplication::No: return "no";
    case PriorApplication::Partially: return "partially";
    case PriorApplication::Fully: return "fully";
    }
    return "no";
}

PriorApplication prior_application_from(const std::string& s) {
    if (s == "no") return PriorApplication::No;
    if (s == "partially") return PriorApplication::Partially;
    if (s == "fully") return PriorApplication::Fully;
    throw Error("invalid guideline_previously_applied value '" + s + "'");
}

Json to_json(const GuidelineMatch& m) {
    Json j = {{"guideline_id", m.guideline_id},
              {"condition_application_rationale", m.condition_application_rationale},
              {"previously_applied_rationale", m.previously_applied_rationale},
              {"guideline_previously_applied", to_string(m.previously_applied)},
              {"applies_score", m.applies_score},
              {"active", decide_activation(m) == Activation::Active}};
    if (m.condition_applies) j["condition_applies"] = *m.condition_applies;
    if (m.guideline_is_continuous) j["guideline_is_continuous"] = *m.guideline_is_continuous;
    if (m.new_or_different_context) j["new_or_different_context"] = *m.new_or_different_context;
    if (m.missing_part_kind) {
        j["missing_part_kind"] = *m.missing_part_kind == MissingPartKind::Cosmetic ? "cosmetic" : "functional";
    }
    if (m.should_reapply) j["guideline_should_reapply"] = *m.should_reapply;
    if (m.inconsistent) j["inconsistent"] = true;
    return j;
}

GuidelineMatch guideline_match_from_json(const Json& c) {
    GuidelineMatch m;
    m.guideline_id = c.at(kGuidelineId).get<std::string>();
    m.condition_application_rationale = c.value(kConditionRationale, std::string());
    if (c.contains(kConditionApplies)) m.condition_applies = c.at(kConditionApplies).get<bool>();
    if (c.contains(kIsContinuous)) m.guideline_is_continuous = c.at(kIsContinuous).get<bool>();
    if (c.contains(kPreviouslyAppliedRationale)) {
        for (auto it = c.at(kPreviouslyAppliedRationale).begin(); it != c.at(kPreviouslyAppliedRationale).end(); ++it) {
            m.previously_applied_rationale[it.key()] = it.value().get<std::string>();
        }
    }
    if (c.contains(kNewContext)) m.new_or_different_context = c.at(kNewContext).get<std::string>();
    m.previously_applied = c.contains(kPreviouslyApplied)
                               ? prior_application_from(c.at(kPreviouslyApplied).get<std::string>())
                               : PriorApplication::No;
    if (m.previously_applied == PriorApplication::Partially && c.contains(kMissingPart)) {
        m.missing_part_kind = c.at(kMissingPart).get<std::string>() == "cosmetic" ? MissingPartKind::Cosmetic
                                                                                  : MissingPartKind::Functional;
    }
    if (m.previously_applied != PriorApplication::No && c.contains(kShouldReapply)) {
        m.should_reapply = c.at(kShouldReapply).get<bool>();
    }
    m.applies_score = c.at(kAppliesScore).get<int>();
    m.inconsistent = m.condition_applies == false && m.applies_score >= kActivationThreshold;
    return m;
}

Activation decide_activation(const GuidelineMatch& m) {
    if (m.applies_score < kActivationThreshold) return Activation::Inactive;
    // Partial fulfilment gates on re-application exactly like full fulfilment.
    if (m.previously_applied == PriorApplication::No) return Activation::Active;
    return m.should_reapply == true ? Activation::Active : Activation::Inactive;
}

std::vector<std::string> ProposerResult::active_ids() const {
    std::vector<std::string> out;
    for (const auto& m : matches) {
        if (decide_activation(m) == Activation::Active) out.push_back(m.guideline_id);
    }
    return out;
}

ReasoningBlueprint proposer_blueprint(ReasoningMode mode, const std::optional<ReasoningBlueprint>& arq_override) {
    if (!arq_override) return builtin_blueprint(Module::Proposer, mode);
    return degenerate_blueprint(*arq_override, mode);
}

std::string build_proposer_prompt(const Session& session, const AgentDefinition& def,
                                  const std::vector<ToolResult>& staged, const std::vector<Guideline>& batch,
                                  const ReasoningBlueprint& bp, const PromptAssets& assets) {
    std::string guidelines;
    for (const auto& g : batch) guidelines += render_guideline(g);
    return render_prompt_template(assets.prompt_template(Module::Proposer),
                                  {{"agent_profile", def.profile.empty() ? "(none)" : def.profile},
                                   {"glossary", render_glossary(def)},
                                   {"interaction_history", render_history(session.events)},
                                   {"staged_tool_calls", render_staged_calls(staged)},
                                   {"examples", assets.render_examples(Module::Proposer, bp)},
                                   {"guidelines", guidelines},
                                   {"output_format", render_schema_instruction(bp)}});
}

namespace {

ExtraCheck batch_id_check(const std::vector<Guideline>& batch) {
    std::vector<std::string> ids;
    for (const auto& g : batch) ids.push_back(g.id);
    return [ids](const StructuredCompletion& sc) {
        std::vector<Violation> out;
        std::map<std::string, int> seen;
        const Json& checks = sc.object.at(kChecks);
        for (std::size_t i = 0; i < checks.size(); ++i) {
            const std::string id = checks[i].at(kGuidelineId).get<std::string>();
            if (std::find(ids.begin(), ids.end(), id) == ids.end()) {
                out.push_back({Violation::Kind::Constraint, "checks[" + std::to_string(i) + "].guideline_id",
                               "an id from the evaluated batch", "checks contains unknown guideline id " + id});
            } else if (++seen[id] > 1) {
                out.push_back({Violation::Kind::Constraint, "checks", "one entry per guideline",
                               "guideline " + id + " is evaluated more than once"});
            }
        }
        for (const auto& id : ids) {
            if (!seen.count(id)) {
                out.push_back({Violation::Kind::Missing, "checks", "one entry per guideline",
                               "missing evaluation for guideline " + id});
            }
        }
        return out;
    };
}

struct BatchOutcome {
    std::optional<ProposerCall> call;
    std::optional<BatchFailure> failure;
    std::vector<GuidelineMatch> matches;
};

BatchOutcome run_batch(std::size_t index, const std::vector<Guideline>& batch, const Session& session,
                       const AgentDefinition& def, const std::vector<ToolResult>& staged,
                       const ReasoningBlueprint& bp, CompletionBackend& backend, const ProposerConfig& config,
                       const PromptAssets& assets) {
    BatchOutcome out;
    std::vector<std::string> ids;
    for (const auto& g : batch) ids.push_back(g.id);
    try {
        const std::string prompt = build_proposer_prompt(session, def, staged, batch, bp, assets);
        StructuredResult r = complete_structured(backend, bp, make_request(config.settings, prompt),
                                                 config.max_repairs, batch_id_check(batch));
        std::map<std::string, GuidelineMatch> by_id;
        for (const auto& check : r.completion.object.at(kChecks)) {
            GuidelineMatch m = guideline_match_from_json(check);
            by_id.emplace(m.guideline_id, std::move(m));
        }
        for (const auto& id : ids) out.matches.push_back(by_id.at(id));
        out.call = ProposerCall{index, ids, r.completion.object, r.usage};
    } catch (const StructuredCompletionError& e) {
        out.failure = BatchFailure{index, ids, e.what(), e.violations(), e.usage()};
    } catch (const Error& e) {
        out.failure = BatchFailure{index, ids, e.what(), {}, {}};
    }
    return out;
}

}  // namespace

ProposerResult propose_guidelines(const Session& session, const AgentDefinition& def,
                                  const std::vector<ToolResult>& staged, ReasoningMode mode,
                                  CompletionBackend& backend, const ProposerConfig& config) {
    const PromptAssets& assets = config.assets ? *config.assets : PromptAssets::defaults();
    const ReasoningBlueprint bp = proposer_blueprint(mode, config.arq_blueprint);
    const auto batches = partition_batches(def.guidelines, config.batch_size);

    std::vector<BatchOutcome> outcomes(batches.size());
    if (config.parallel_batches && batches.size() > 1) {
        std::vector<std::future<BatchOutcome>> futures;
        for (std::size_t i = 0; i < batches.size(); ++i) {
            futures.push_back(std::async(std::launch::async, [&, i] {
                return run_batch(i, batches[i], session, def, staged, bp, backend, config, assets);
            }));
        }
        for (std::size_t i = 0; i < futures.size(); ++i) outcomes[i] = futures[i].get();
    } else {
        for (std::size_t i = 0; i < batches.size(); ++i) {
            outcomes[i] = run_batch(i, batches[i], session, def, staged, bp, backend, config, assets);
        }
    }

    ProposerResult result;
    for (auto& o : outcomes) {
        if (o.call) result.calls.push_back(std::move(*o.call));
        if (o.failure) result.failures.push_back(std::move(*o.failure));
        for (auto& m : o.matches) result.matches.push_back(std::move(m));
    }
    return result;
}

}  // namespace arq
