#include "arq/tool_caller.hpp"

#include "http_url.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <set>

namespace arq {

using namespace keys;

Json ToolCallDecision::arguments() const {
    Json args = Json::object();
    if (!argument_evaluations) return args;
    for (const auto& [name, eval] : *argument_evaluations) {
        if (eval.value && !eval.value->is_null()) args[name] = *eval.value;
    }
    return args;
}

Json to_json(const ToolCallDecision& d) {
    Json j = {{"tool_name", d.tool_name},
              {"applicability_rationale", d.applicability_rationale},
              {"applicability_score", d.applicability_score},
              {"same_call_is_already_staged", d.same_call_is_already_staged},
              {"comparison_with_rejected", d.comparison_with_rejected},
              {"relevant_subtleties", d.relevant_subtleties},
              {"better_rejected_exists", d.better_rejected_exists},
              {"should_run", d.should_run},
              {"iteration", d.iteration}};
    if (d.argument_evaluations) {
        Json evals = Json::object();
        for (const auto& [name, e] : *d.argument_evaluations) evals[name] = e.details;
        j["argument_evaluations"] = evals;
        j["arguments"] = d.arguments();
    }
    if (d.better_rejected_name) j["better_rejected_name"] = *d.better_rejected_name;
    if (d.better_rejected_rationale) j["better_rejected_rationale"] = *d.better_rejected_rationale;
    if (d.run_in_tandem) j["run_in_tandem"] = *d.run_in_tandem;
    return j;
}

std::vector<ToolCallDecision> tool_call_decisions_from_json(const Json& c, int iteration) {
    const std::string name = c.at(kToolName).get<std::string>();
    std::vector<ToolCallDecision> out;
    for (const auto& call : c.at(kToolCalls)) {
        ToolCallDecision d;
        d.tool_name = name;
        d.iteration = iteration;
        d.applicability_rationale = call.value(kApplicabilityRationale, std::string());
        d.applicability_score = call.at(kApplicabilityScore).get<int>();
        if (call.contains(kArgumentEvaluations)) {
            std::map<std::string, ArgumentEvaluation> evals;
            for (auto it = call.at(kArgumentEvaluations).begin(); it != call.at(kArgumentEvaluations).end(); ++it) {
                ArgumentEvaluation e;
                e.details = it.value();
                e.evaluation = it.value().value(kArgEvaluation, std::string());
                if (it.value().contains(kArgValue)) e.value = it.value().at(kArgValue);
                evals.emplace(it.key(), std::move(e));
            }
            d.argument_evaluations = std::move(evals);
        }
        d.same_call_is_already_staged = call.at(kAlreadyStaged).get<bool>();
        d.comparison_with_rejected = call.value(kComparison, std::string());
        d.relevant_subtleties = call.value(kRelevantSubtleties, std::string());
        d.better_rejected_exists = call.value(kBetterRejected, false);
        if (d.better_rejected_exists) {
            if (call.contains(kBetterRejectedName)) d.better_rejected_name = call.at(kBetterRejectedName).get<std::string>();
            if (call.contains(kBetterRejectedRationale)) {
                d.better_rejected_rationale = call.at(kBetterRejectedRationale).get<std::string>();
            }
            if (call.contains(kRunInTandem)) d.run_in_tandem = call.at(kRunInTandem).get<bool>();
        }
        d.should_run = call.at(kShouldRun).get<bool>();
        out.push_back(std::move(d));
    }
    return out;
}

Json to_json(const ExecutionVerdict& v) {
    Json j = {{"action", v.execute() ? "execute" : "skip"}};
    if (!v.reason.empty()) j["reason"] = v.reason;
    if (!v.detail.empty()) j["detail"] = v.detail;
    return j;
}

namespace {

bool matches_type(const Json& value, const ToolParameter& p) {
    switch (p.type) {
    case ParamType::String: return value.is_string();
    case ParamType::Number: return value.is_number() && std::isfinite(value.get<double>());
    case ParamType::Boolean: return value.is_boolean();
    case ParamType::Enum:
        return value.is_string() &&
               std::find(p.enum_values.begin(), p.enum_values.end(), value.get<std::string>()) != p.enum_values.end();
    }
    return false;
}

}  // namespace

std::vector<std::string> validate_arguments(const Json& args, const ToolDescriptor& tool) {
    std::vector<std::string> out;
    if (!args.is_object()) return {"arguments must be an object"};
    for (const auto& p : tool.parameters) {
        auto it = args.find(p.name);
        if (it == args.end()) {
            if (p.required) out.push_back("missing required argument " + p.name);
            continue;
        }
        if (!matches_type(*it, p)) {
            out.push_back("argument " + p.name + " is not a valid " + to_string(p.type) + ": " + it->dump());
        }
    }
    for (auto it = args.begin(); it != args.end(); ++it) {
        if (!tool.find_parameter(it.key())) out.push_back("unknown argument " + it.key());
    }
    return out;
}

ExecutionVerdict decide_execution(const ToolCallDecision& d, const ToolDescriptor& tool,
                                  const std::vector<ToolResult>& executed, const ExecutionPolicy& policy) {
    if (!d.should_run) return ExecutionVerdict::skip("model-declined");
    if (d.applicability_score < kRunThreshold) return ExecutionVerdict::skip("below-threshold");
    const Json args = d.arguments();
    const auto problems = validate_arguments(args, tool);
    if (!problems.empty()) {
        std::string detail;
        for (const auto& p : problems) detail += (detail.empty() ? "" : "; ") + p;
        return ExecutionVerdict::skip("invalid-arguments", detail);
    }
    const ToolResult probe{tool.name, canonical_json(args), nullptr};
    const bool repeat = std::any_of(executed.begin(), executed.end(), [&](const ToolResult& r) { return r.same_call(probe); });
    if (repeat) {
        const bool justified = policy.allow_justified_reexecution && d.iteration > 1 && d.same_call_is_already_staged;
        if (!justified) return ExecutionVerdict::skip("duplicate", probe.canonical_args);
    }
    return ExecutionVerdict::run();
}

ToolRegistry::ToolRegistry(const std::vector<ToolDescriptor>& tools) {
    for (const auto& t : tools) add(t);
}

void ToolRegistry::add(const ToolDescriptor& tool) { tools_[tool.name] = tool; }

bool ToolRegistry::contains(const std::string& name) const { return tools_.count(name) > 0; }

namespace {

Json run_scripted(const ScriptedBinding& b, const std::string& tool, const std::string& canonical_args) {
    for (const auto& e : b.results) {
        if (e.canonical_args == canonical_args) return e.result;
    }
    if (b.default_result) return *b.default_result;
    return {{"error", "no scripted result for " + tool + "(" + canonical_args + ")"}};
}

Json run_http(const HttpBinding& b, const std::string& canonical_args) {
    try {
        const auto url = detail::parse_url(b.endpoint);
        httplib::Client cli(url.scheme_host_port);
        const auto secs = b.timeout_ms / 1000;
        const auto usecs = (b.timeout_ms % 1000) * 1000;
        cli.set_connection_timeout(secs, usecs);
        cli.set_read_timeout(secs, usecs);
        cli.set_write_timeout(secs, usecs);
        auto res = cli.Post(url.path_prefix.empty() ? "/" : url.path_prefix, canonical_args, "application/json");
        if (!res) return {{"error", "transport failure: " + httplib::to_string(res.error())}};
        Json body = Json::parse(res->body, nullptr, false);
        if (body.is_discarded()) body = res->body;
        if (res->status < 200 || res->status >= 300) {
            return {{"error", "tool endpoint returned status " + std::to_string(res->status)}, {"body", body}};
        }
        return body;
    } catch (const std::exception& e) {
        return {{"error", std::string("tool invocation failed: ") + e.what()}};
    }
}

}  // namespace

ToolResult ToolRegistry::execute(const std::string& name, const Json& args) const {
    auto it = tools_.find(name);
    if (it == tools_.end()) throw UnknownToolError(name);
    ToolResult r{name, canonical_json(args), nullptr};
    r.result = std::visit(
        [&](const auto& b) -> Json {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, ScriptedBinding>) {
                return run_scripted(b, name, r.canonical_args);
            } else {
                return run_http(b, r.canonical_args);
            }
        },
        it->second.binding);
    return r;
}

std::vector<ToolResult> execute_tools(const std::vector<ToolCallDecision>& decisions, const ToolRegistry& registry) {
    std::vector<ToolResult> out;
    out.reserve(decisions.size());
    for (const auto& d : decisions) out.push_back(registry.execute(d.tool_name, d.arguments()));
    return out;
}

std::vector<const ToolDescriptor*> candidate_tools(const AgentDefinition& def,
                                                   const std::vector<std::string>& active_ids) {
    std::set<std::string> attached;
    for (const auto& id : active_ids) {
        if (const Guideline* g = def.find_guideline(id)) attached.insert(g->tool_ids.begin(), g->tool_ids.end());
    }
    std::vector<const ToolDescriptor*> out;
    for (const auto& t : def.tools) {
        if (attached.count(t.name)) out.push_back(&t);
    }
    return out;
}

std::string build_tool_caller_prompt(const Session& session, const AgentDefinition& def,
                                     const std::vector<std::string>& active_ids,
                                     const std::vector<ToolResult>& staged, const ToolDescriptor& candidate,
                                     const std::vector<const ToolDescriptor*>& candidates,
                                     const ReasoningBlueprint& bp, const PromptAssets& assets) {
    std::string active;
    for (const auto& id : active_ids) {
        if (const Guideline* g = def.find_guideline(id)) active += render_guideline(*g);
    }
    std::string others;
    for (const auto* t : candidates) {
        if (t->name != candidate.name) others += render_tool(*t) + "\n";
    }
    // Tools not attached to any active guideline are shown as rejected.
    std::string rejected;
    for (const auto& t : def.tools) {
        const bool is_candidate =
            std::any_of(candidates.begin(), candidates.end(), [&](const ToolDescriptor* c) { return c->name == t.name; });
        if (!is_candidate) rejected += render_tool(t) + "\n";
    }
    return render_prompt_template(
        assets.prompt_template(Module::ToolCaller),
        {{"agent_profile", def.profile.empty() ? "(none)" : def.profile},
         {"glossary", render_glossary(def)},
         {"interaction_history", render_history(session.events)},
         {"active_guidelines", active.empty() ? "(none)" : active},
         {"staged_tool_calls", render_staged_calls(staged)},
         {"candidate_tool", render_tool(candidate)},
         {"other_candidate_tools", others.empty() ? "(none)" : others},
         {"rejected_tools", rejected.empty() ? "(none)" : rejected},
         {"examples", assets.render_examples(Module::ToolCaller, bp)},
         {"output_format", render_schema_instruction(bp)}});
}

namespace {

ExtraCheck tool_name_check(const std::string& name) {
    return [name](const StructuredCompletion& sc) {
        std::vector<Violation> out;
        const std::string got = sc.object.at(kToolName).get<std::string>();
        if (got != name) {
            out.push_back({Violation::Kind::Constraint, kToolName, name,
                           "name must be the candidate tool " + name + ", got " + got});
        }
        return out;
    };
}

}  // namespace

ToolCallerResult infer_tool_calls(const Session& session, const AgentDefinition& def,
                                  const std::vector<std::string>& active_ids, const std::vector<ToolResult>& staged,
                                  ReasoningMode mode, CompletionBackend& backend, int iteration,
                                  const ToolCallerConfig& config) {
    const PromptAssets& assets = config.assets ? *config.assets : PromptAssets::defaults();
    const ReasoningBlueprint bp = config.arq_blueprint ? degenerate_blueprint(*config.arq_blueprint, mode)
                                                       : builtin_blueprint(Module::ToolCaller, mode);
    const auto candidates = candidate_tools(def, active_ids);

    ToolCallerResult result;
    for (const ToolDescriptor* tool : candidates) {
        try {
            const std::string prompt =
                build_tool_caller_prompt(session, def, active_ids, staged, *tool, candidates, bp, assets);
            StructuredResult r = complete_structured(backend, bp, make_request(config.settings, prompt),
                                                     config.max_repairs, tool_name_check(tool->name));
            for (auto& d : tool_call_decisions_from_json(r.completion.object, iteration)) {
                result.decisions.push_back(std::move(d));
            }
            result.calls.push_back({tool->name, r.completion.object, r.usage});
        } catch (const StructuredCompletionError& e) {
            result.failures.push_back({tool->name, e.what(), e.violations(), e.usage()});
        } catch (const Error& e) {
            result.failures.push_back({tool->name, e.what(), {}, {}});
        }
    }
    return result;
}

}  // namespace arq
