#pragma once

#include "arq/agent.hpp"
#include "arq/blueprint.hpp"
#include "arq/gateway.hpp"
#include "arq/prompt_assets.hpp"
#include "arq/session.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace arq {

enum class PriorApplication { No, Partially, Fully };
enum class MissingPartKind { Cosmetic, Functional };

std::string to_string(PriorApplication p);
PriorApplication prior_application_from(const std::string& s);

/// Structured verdict of the proposer for one guideline. Reasoning fields
/// are empty/absent when the completion came from a CoT or Direct prompt.
struct GuidelineMatch {
    std::string guideline_id;
    std::string condition_application_rationale;
    std::optional<bool> condition_applies;
    std::optional<bool> guideline_is_continuous;
    std::map<std::string, std::string> previously_applied_rationale;  // action segment -> explanation
    std::optional<std::string> new_or_different_context;
    PriorApplication previously_applied = PriorApplication::No;
    std::optional<MissingPartKind> missing_part_kind;  // only when previously_applied is Partially
    std::optional<bool> should_reapply;
    int applies_score = 1;
    bool inconsistent = false;  // condition_applies == false while the score would activate

    friend bool operator==(const GuidelineMatch&, const GuidelineMatch&) = default;
};

Json to_json(const GuidelineMatch& m);

/// Builds a match from one entry of the proposer's "checks" list.
GuidelineMatch guideline_match_from_json(const Json& check);

inline constexpr int kActivationThreshold = 6;

enum class Activation { Active, Inactive };

/// Active iff applies_score >= 6 and the guideline was not previously
/// applied, or the model asked to re-apply it.
Activation decide_activation(const GuidelineMatch& m);

/// Order-preserving split into consecutive chunks of at most batch_size.
template <typename T>
std::vector<std::vector<T>> partition_batches(const std::vector<T>& items, std::size_t batch_size) {
    if (batch_size == 0) throw Error("batch_size must be at least 1");
    std::vector<std::vector<T>> out;
    for (std::size_t i = 0; i < items.size(); i += batch_size) {
        const std::size_t end = std::min(items.size(), i + batch_size);
        out.emplace_back(items.begin() + static_cast<std::ptrdiff_t>(i), items.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return out;
}

inline constexpr std::size_t kDefaultBatchSize = 5;

struct ProposerConfig {
    ModuleSettings settings = default_settings(Module::Proposer);
    std::size_t batch_size = kDefaultBatchSize;
    int max_repairs = kDefaultMaxRepairs;
    bool parallel_batches = false;
    std::optional<ReasoningBlueprint> arq_blueprint;  // replaces the builtin ARQ schema
    const PromptAssets* assets = nullptr;             // defaults to PromptAssets::defaults()
};

struct BatchFailure {
    std::size_t batch_index = 0;
    std::vector<std::string> guideline_ids;
    std::string error;
    std::vector<Violation> violations;
    Usage usage;
};

struct ProposerCall {
    std::size_t batch_index = 0;
    std::vector<std::string> guideline_ids;
    Json completion;  // parsed object, verbatim
    Usage usage;
};

struct ProposerResult {
    std::vector<GuidelineMatch> matches;  // input guideline order
    std::vector<ProposerCall> calls;       // batch order
    std::vector<BatchFailure> failures;

    bool ok() const { return failures.empty(); }
    std::vector<std::string> active_ids() const;
};

std::string build_proposer_prompt(const Session& session, const AgentDefinition& def,
                                  const std::vector<ToolResult>& staged, const std::vector<Guideline>& batch,
                                  const ReasoningBlueprint& bp, const PromptAssets& assets);

ReasoningBlueprint proposer_blueprint(ReasoningMode mode, const std::optional<ReasoningBlueprint>& arq_override);

/**
 * Scores every guideline of the agent against the current interaction.
 * One structured completion per batch; a failed batch is reported in
 * failures and does not affect the others.
 */
ProposerResult propose_guidelines(const Session& session, const AgentDefinition& def,
                                  const std::vector<ToolResult>& staged, ReasoningMode mode,
                                  CompletionBackend& backend, const ProposerConfig& config = {});

}  // namespace arq
