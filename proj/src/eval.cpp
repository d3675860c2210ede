#include "arq/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <thread>

namespace arq {

std::string to_string(ScenarioKind kind) {
    return kind == ScenarioKind::GuidelineOnly ? "guideline_only" : "comprehensive";
}

ScenarioKind scenario_kind_from(const std::string& text) {
    if (text == "guideline_only") return ScenarioKind::GuidelineOnly;
    if (text == "comprehensive") return ScenarioKind::Comprehensive;
    throw Error("unknown scenario kind '" + text + "'");
}

namespace {

const std::vector<std::string> kScriptKeys = {"arq", "cot", "direct", "judge"};

std::string script_key(ReasoningMode mode) { return to_string(mode); }

}  // namespace

TestScenario scenario_from_json(const Json& j, const std::string& source) {
    TestScenario s;
    s.source = source;
    std::string field;
    auto fail = [&](const std::string& message) -> ScenarioError {
        std::string where = source;
        if (!s.id.empty()) where += " (scenario " + s.id + ")";
        if (!field.empty()) where += ": field '" + field + "'";
        return ScenarioError(where + ": " + message);
    };
    try {
        if (!j.is_object()) throw fail("scenario must be a JSON object");
        field = "id";
        s.id = j.at("id").get<std::string>();
        if (s.id.empty()) throw fail("must not be empty");
        field = "kind";
        s.kind = scenario_kind_from(j.at("kind").get<std::string>());
        field = "description";
        s.description = j.value("description", std::string());

        field = "agent";
        s.agent = agent_from_json(j.at("agent"));
        if (const auto v = validate_agent_definition(s.agent); !v.empty()) {
            std::string all;
            for (const auto& x : v) all += (all.empty() ? "" : "; ") + x;
            throw fail(all);
        }

        field = "history";
        for (const auto& e : j.at("history")) s.history.push_back(event_from_json(e));
        if (s.history.empty() || !std::holds_alternative<CustomerMessage>(s.history.back())) {
            throw fail("must end with a customer message");
        }

        const bool has_expected = j.contains("expected_guideline_ids");
        const bool has_criteria = j.contains("success_criteria");
        if (s.kind == ScenarioKind::GuidelineOnly) {
            field = "success_criteria";
            if (has_criteria) throw fail("guideline_only scenarios take expected_guideline_ids, not success_criteria");
            field = "expected_guideline_ids";
            for (const auto& id : j.at("expected_guideline_ids")) {
                const std::string gid = id.get<std::string>();
                if (!s.agent.find_guideline(gid)) throw fail("unknown guideline id " + gid);
                if (!s.expected_guideline_ids.insert(gid).second) throw fail("duplicate guideline id " + gid);
            }
        } else {
            field = "expected_guideline_ids";
            if (has_expected) throw fail("comprehensive scenarios take success_criteria, not expected_guideline_ids");
            field = "success_criteria";
            s.success_criteria = j.at("success_criteria").get<std::vector<std::string>>();
            if (s.success_criteria.empty()) throw fail("needs at least one criterion");
            for (const auto& c : s.success_criteria) {
                if (c.empty()) throw fail("criteria must not be empty");
            }
        }

        field = "tool_fixtures";
        if (j.contains("tool_fixtures")) {
            for (const auto& f : j.at("tool_fixtures")) {
                ToolFixture fx{f.at("tool").get<std::string>(),
                               canonical_json(f.contains("arguments") ? f.at("arguments") : Json::object()),
                               f.at("result")};
                if (!s.agent.find_tool(fx.tool)) throw fail("fixture for unknown tool " + fx.tool);
                s.tool_fixtures.push_back(std::move(fx));
            }
        }

        field = "scripted";
        if (j.contains("scripted")) {
            for (auto it = j.at("scripted").begin(); it != j.at("scripted").end(); ++it) {
                field = "scripted." + it.key();
                if (std::find(kScriptKeys.begin(), kScriptKeys.end(), it.key()) == kScriptKeys.end()) {
                    throw fail("unknown script key; expected arq, cot, direct or judge");
                }
                s.scripts[it.key()] = script_from_json(it.value());
            }
        }
    } catch (const ScenarioError&) {
        throw;
    } catch (const Json::exception& e) {
        throw fail(e.what());
    } catch (const Error& e) {
        throw fail(e.what());
    }
    return s;
}

std::vector<TestScenario> load_scenarios(const std::string& path) {
    namespace fs = std::filesystem;
    std::vector<std::string> files;
    if (fs::is_directory(path)) {
        for (const auto& entry : fs::directory_iterator(path)) {
            if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path().string());
        }
        std::sort(files.begin(), files.end());
    } else if (fs::exists(path)) {
        files.push_back(path);
    } else {
        throw ScenarioError("no such scenario file or directory: " + path);
    }
    std::vector<TestScenario> out;
    std::set<std::string> ids;
    for (const auto& f : files) {
        Json j;
        try {
            j = load_json_file(f);
        } catch (const Error& e) {
            throw ScenarioError(e.what());
        }
        out.push_back(scenario_from_json(j, f));
        if (!ids.insert(out.back().id).second) throw ScenarioError(f + ": duplicate scenario id " + out.back().id);
    }
    return out;
}

AgentDefinition agent_with_fixtures(const TestScenario& s) {
    AgentDefinition def = s.agent;
    for (const auto& fx : s.tool_fixtures) {
        for (auto& t : def.tools) {
            if (t.name != fx.tool) continue;
            if (!std::holds_alternative<ScriptedBinding>(t.binding)) t.binding = ScriptedBinding{};
            auto& b = std::get<ScriptedBinding>(t.binding);
            b.results.insert(b.results.begin(), {fx.canonical_args, fx.result});
        }
    }
    return def;
}

bool score_guideline_scenario(const std::set<std::string>& proposed, const std::set<std::string>& expected) {
    return proposed == expected;
}

std::optional<CriterionResult> check_structural_criterion(const std::string& criterion, const TurnTrace& trace,
                                                          const AgentDefinition& def) {
    const std::string prefix = "tool:";
    if (criterion.rfind(prefix, 0) != 0) return std::nullopt;
    std::istringstream in(criterion.substr(prefix.size()));
    std::string name, verb;
    in >> name >> verb;
    CriterionResult r;
    r.criterion = criterion;
    r.structural = true;

    std::vector<const ToolResult*> calls;
    for (const auto& it : trace.iterations) {
        for (const auto& e : it.executed) {
            if (e.tool == name) calls.push_back(&e);
        }
    }

    if (verb == "not") {
        std::string rest;
        in >> rest;
        if (rest != "invoked") return std::nullopt;
        r.satisfied = calls.empty();
        r.rationale = r.satisfied ? name + " was not invoked" : name + " was invoked " + std::to_string(calls.size()) + " time(s)";
        return r;
    }
    if (verb != "invoked") return std::nullopt;

    std::string tail;
    std::getline(in, tail);
    const auto with = tail.find("with");
    Json wanted = Json::object();
    if (with != std::string::npos) {
        wanted = Json::parse(tail.substr(with + 4), nullptr, false);
        if (wanted.is_discarded() || !wanted.is_object()) {
            r.rationale = "malformed structural criterion: expected a JSON object after 'with'";
            return r;
        }
    }
    const ToolDescriptor* tool = def.find_tool(name);
    for (const ToolResult* c : calls) {
        const Json args = Json::parse(c->canonical_args);
        bool ok = true;
        if (tool) {
            for (const auto& p : tool->parameters) {
                if (p.required && !args.contains(p.name)) ok = false;
            }
        }
        for (auto it = wanted.begin(); it != wanted.end() && ok; ++it) {
            if (!args.contains(it.key()) || canonical_json(args.at(it.key())) != canonical_json(it.value())) ok = false;
        }
        if (ok) {
            r.satisfied = true;
            r.rationale = name + " invoked with " + c->canonical_args;
            return r;
        }
    }
    r.rationale = calls.empty() ? name + " was not invoked"
                                : name + " was invoked but never with the required arguments";
    return r;
}

std::string build_judge_prompt(const Session& session, const std::string& agent_response, const std::string& criterion,
                               const PromptAssets& assets) {
    const ReasoningBlueprint bp = builtin_blueprint(Module::Judge, ReasoningMode::Arq);
    return render_prompt_template(assets.prompt_template(Module::Judge),
                                  {{"interaction_history", render_history(session.events)},
                                   {"agent_response", agent_response},
                                   {"criterion", criterion},
                                   {"output_format", render_schema_instruction(bp)}});
}

CriterionResult judge_criterion(const Session& session, const std::string& agent_response, const TurnTrace& trace,
                                const AgentDefinition& def, const std::string& criterion,
                                CompletionBackend& judge_backend, const ModuleSettings& settings,
                                const PromptAssets* assets) {
    if (criterion.empty()) throw Error("criterion must not be empty");
    if (auto structural = check_structural_criterion(criterion, trace, def)) return *structural;
    CriterionResult r;
    r.criterion = criterion;
    const PromptAssets& a = assets ? *assets : PromptAssets::defaults();
    const ReasoningBlueprint bp = builtin_blueprint(Module::Judge, ReasoningMode::Arq);
    try {
        StructuredResult sr = complete_structured(judge_backend, bp,
                                                  make_request(settings, build_judge_prompt(session, agent_response, criterion, a)),
                                                  kDefaultMaxRepairs);
        r.usage = sr.usage;
        r.satisfied = sr.completion.object.at(keys::kCriterionSatisfied).get<bool>();
        r.rationale = sr.completion.object.at(keys::kQuotedEvidence).get<std::string>();
    } catch (const StructuredCompletionError& e) {
        r.usage = e.usage();
        r.reason = "judge-error";
        r.rationale = e.what();
    } catch (const Error& e) {
        r.reason = "judge-error";
        r.rationale = e.what();
    }
    return r;
}

Json to_json(const RunResult& r) {
    Json criteria = Json::array();
    for (const auto& c : r.criteria) {
        Json j = {{"criterion", c.criterion},
                  {"satisfied", c.satisfied},
                  {"structural", c.structural},
                  {"rationale", c.rationale}};
        if (!c.reason.empty()) j["reason"] = c.reason;
        criteria.push_back(std::move(j));
    }
    Json j = {{"scenario_id", r.scenario_id},
              {"kind", to_string(r.kind)},
              {"mode", to_string(r.mode)},
              {"repetition", r.repetition},
              {"passed", r.passed}};
    if (!r.reason.empty()) j["reason"] = r.reason;
    if (r.kind == ScenarioKind::GuidelineOnly) {
        j["proposed_guideline_ids"] = r.proposed_guideline_ids;
    } else {
        j["criteria"] = criteria;
        j["agent_message"] = r.agent_message;
        j["hallucination_risk"] = r.hallucination_risk;
    }
    return j;
}

namespace {

// Stands in for a mode without a script so the run fails with a clear reason.
class MissingScriptBackend : public CompletionBackend {
public:
    explicit MissingScriptBackend(std::string what) : what_(std::move(what)) {}
    CompletionResponse complete(const CompletionRequest&) override { throw ScriptExhaustedError(what_); }

private:
    std::string what_;
};

std::shared_ptr<CompletionBackend> scripted_for(const TestScenario& s, const std::string& key) {
    auto it = s.scripts.find(key);
    if (it == s.scripts.end()) {
        return std::make_shared<MissingScriptBackend>("scenario " + s.id + " has no '" + key + "' script");
    }
    return std::make_shared<ScriptedBackend>(it->second);
}

}  // namespace

BackendProvider scripted_provider() {
    BackendProvider p;
    p.pipeline = [](const TestScenario& s, ReasoningMode mode) {
        return EngineBackends::shared(scripted_for(s, script_key(mode)));
    };
    p.judge = [](const TestScenario& s) { return scripted_for(s, "judge"); };
    return p;
}

BackendProvider shared_provider(std::shared_ptr<CompletionBackend> backend) {
    BackendProvider p;
    p.pipeline = [backend](const TestScenario&, ReasoningMode) { return EngineBackends::shared(backend); };
    p.judge = [backend](const TestScenario&) { return backend; };
    return p;
}

namespace {

RunResult run_guideline_only(const TestScenario& s, ReasoningMode mode, const EngineBackends& backends,
                             const EngineConfig& config, const PromptAssets* assets) {
    RunResult r;
    Session session;
    session.id = "eval";
    session.events = s.history;
    ProposerConfig pc;
    pc.settings = config.proposer;
    pc.batch_size = config.batch_size;
    pc.max_repairs = config.max_repairs;
    pc.parallel_batches = config.parallel_batches;
    pc.assets = assets;
    const ProposerResult pr = propose_guidelines(session, s.agent, {}, mode, *backends.proposer, pc);
    for (const auto& c : pr.calls) r.calls.emplace_back(Module::Proposer, c.usage);
    for (const auto& f : pr.failures) r.calls.emplace_back(Module::Proposer, f.usage);
    if (!pr.ok()) {
        r.reason = "proposer-error: " + pr.failures.front().error;
        return r;
    }
    r.proposed_guideline_ids = pr.active_ids();
    const std::set<std::string> proposed(r.proposed_guideline_ids.begin(), r.proposed_guideline_ids.end());
    r.passed = score_guideline_scenario(proposed, s.expected_guideline_ids);
    if (!r.passed) {
        std::string want;
        for (const auto& id : s.expected_guideline_ids) want += (want.empty() ? "" : ",") + id;
        std::string got;
        for (const auto& id : proposed) got += (got.empty() ? "" : ",") + id;
        r.reason = "proposed {" + got + "} expected {" + want + "}";
    }
    return r;
}

RunResult run_comprehensive(const TestScenario& s, ReasoningMode mode, const EngineBackends& backends,
                            const std::shared_ptr<CompletionBackend>& judge, const EngineConfig& config,
                            const PromptAssets* assets) {
    RunResult r;
    const AgentDefinition def = agent_with_fixtures(s);
    Engine engine(std::make_shared<MemoryStore>(), backends, config, assets);
    const std::string agent_id = engine.create_agent(def, "scenario-agent");
    std::vector<Event> seed(s.history.begin(), s.history.end() - 1);
    const std::string text = std::get<CustomerMessage>(s.history.back()).text;
    const std::string session_id = engine.create_session(agent_id, std::move(seed));

    TurnOutcome out;
    try {
        out = engine.process_turn(session_id, text, mode);
    } catch (const TurnFailedError& e) {
        for (const auto& [module, usage] : e.usage_by_module()) r.calls.emplace_back(module_from(module), usage);
        r.reason = std::string("turn-failed: ") + e.what();
        return r;
    }
    r.calls = out.trace.calls;
    r.agent_message = out.agent_message.text;
    r.hallucination_risk = out.trace.message_trace.hallucination_risk;

    const Session session = engine.get_session(session_id);
    r.passed = true;
    for (const auto& c : s.success_criteria) {
        CriterionResult cr = judge_criterion(session, r.agent_message, out.trace, def, c, *judge,
                                             default_settings(Module::Judge), assets);
        if (!cr.structural) r.calls.emplace_back(Module::Judge, cr.usage);
        if (!cr.satisfied) {
            r.passed = false;
            if (r.reason.empty()) {
                r.reason = (cr.reason.empty() ? "criterion not met: " : cr.reason + ": ") + c;
            }
        }
        r.criteria.push_back(std::move(cr));
    }
    return r;
}

}  // namespace

std::vector<RunResult> run_scenario(const TestScenario& s, ReasoningMode mode, int repetitions,
                                    const BackendProvider& backends, const EngineConfig& config,
                                    const PromptAssets* assets) {
    if (repetitions < 1) throw Error("repetitions must be at least 1");
    std::vector<RunResult> out;
    for (int rep = 1; rep <= repetitions; ++rep) {
        RunResult r;
        try {
            const EngineBackends pipeline = backends.pipeline(s, mode);
            if (s.kind == ScenarioKind::GuidelineOnly) {
                r = run_guideline_only(s, mode, pipeline, config, assets);
            } else {
                r = run_comprehensive(s, mode, pipeline, backends.judge(s), config, assets);
            }
        } catch (const std::exception& e) {
            r = RunResult{};
            r.reason = std::string("error: ") + e.what();
        }
        r.scenario_id = s.id;
        r.kind = s.kind;
        r.mode = mode;
        r.repetition = rep;
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<RunResult> run_evaluation(const std::vector<TestScenario>& scenarios, const BackendProvider& backends,
                                      const EvalOptions& options) {
    struct Job {
        ReasoningMode mode;
        const TestScenario* scenario;
    };
    std::vector<Job> jobs;
    for (ReasoningMode m : options.modes) {
        for (const auto& s : scenarios) jobs.push_back({m, &s});
    }
    std::vector<std::vector<RunResult>> slots(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            slots[i] = run_scenario(*jobs[i].scenario, jobs[i].mode, options.repetitions, backends, options.config,
                                    options.assets);
        }
    };
    const int workers = std::max(1, std::min<int>(options.parallelism, static_cast<int>(jobs.size())));
    std::vector<std::thread> pool;
    for (int i = 1; i < workers; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::vector<RunResult> out;
    for (auto& slot : slots) {
        for (auto& r : slot) out.push_back(std::move(r));
    }
    return out;
}

double weighted_total_rate(const std::vector<CategoryRate>& categories) {
    std::int64_t count = 0;
    double sum = 0.0;
    for (const auto& c : categories) {
        count += c.count;
        sum += static_cast<double>(c.count) * c.rate;
    }
    if (count == 0) throw EmptyGroupError("no results to aggregate");
    return sum / static_cast<double>(count);
}

PassRule pass_rule_from(const std::string& text) {
    if (text == "majority") return PassRule::Majority;
    if (text == "all") return PassRule::All;
    if (text == "any") return PassRule::Any;
    throw Error("unknown pass rule '" + text + "'");
}

std::string to_string(PassRule rule) {
    switch (rule) {
    case PassRule::Majority: return "majority";
    case PassRule::All: return "all";
    case PassRule::Any: return "any";
    }
    return "majority";
}

bool passes(PassRule rule, int passes, int runs) {
    switch (rule) {
    case PassRule::Majority: return 2 * passes > runs;
    case PassRule::All: return runs > 0 && passes == runs;
    case PassRule::Any: return passes > 0;
    }
    return false;
}

double KindStats::rate() const {
    return runs == 0 ? 0.0 : 100.0 * static_cast<double>(passes) / static_cast<double>(runs);
}

bool EvalReport::all_passed() const {
    for (const auto& m : modes) {
        for (const auto& s : m.scenarios) {
            if (!s.passed) return false;
        }
    }
    return true;
}

EvalReport aggregate_report(const std::vector<RunResult>& results, PassRule rule) {
    if (results.empty()) throw EmptyGroupError("no results to aggregate");
    EvalReport report;
    report.rule = rule;
    for (ReasoningMode mode : {ReasoningMode::Arq, ReasoningMode::Cot, ReasoningMode::Direct}) {
        std::map<std::string, ScenarioSummary> by_id;
        std::map<std::string, std::vector<Usage>> usages;
        bool any = false;
        for (const auto& r : results) {
            if (r.mode != mode) continue;
            any = true;
            auto& s = by_id[r.scenario_id];
            s.scenario_id = r.scenario_id;
            s.kind = r.kind;
            ++s.runs;
            if (r.passed) ++s.passes;
            if (!r.passed && !r.reason.empty()) s.failure_reasons.push_back(r.reason);
            for (const auto& [module, usage] : r.calls) usages[to_string(module)].push_back(usage);
        }
        if (!any) continue;
        ModeReport m;
        m.mode = mode;
        for (auto& [id, s] : by_id) {
            std::sort(s.failure_reasons.begin(), s.failure_reasons.end());
            s.failure_reasons.erase(std::unique(s.failure_reasons.begin(), s.failure_reasons.end()),
                                    s.failure_reasons.end());
            s.passed = passes(rule, s.passes, s.runs);
            auto& k = m.kinds[s.kind];
            ++k.scenarios;
            k.runs += s.runs;
            k.passes += s.passes;
            m.scenarios.push_back(s);
        }
        std::vector<CategoryRate> cats;
        for (const auto& [kind, k] : m.kinds) cats.push_back({k.runs, k.rate()});
        m.total_rate = weighted_total_rate(cats);
        for (const auto& [module, list] : usages) m.tokens_by_module[module] = summarize_usage(list, module);
        report.modes.push_back(std::move(m));
    }
    return report;
}

namespace {

// Two decimals, rounded once, so table and JSON agree.
double round2(double v) { return std::round(v * 100.0) / 100.0; }

std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", round2(v));
    return buf;
}

std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

Json to_json(const EvalReport& report) {
    Json modes = Json::array();
    for (const auto& m : report.modes) {
        Json kinds = Json::object();
        for (const auto& [kind, k] : m.kinds) {
            kinds[to_string(kind)] = {{"scenarios", k.scenarios},
                                      {"runs", k.runs},
                                      {"passes", k.passes},
                                      {"rate", round2(k.rate())}};
        }
        Json tokens = Json::object();
        for (const auto& [module, u] : m.tokens_by_module) {
            tokens[module] = {{"samples", u.samples},
                              {"total_output_tokens", u.total_output_tokens},
                              {"mean_output_tokens", u.rounded_mean()}};
        }
        Json scenarios = Json::array();
        for (const auto& s : m.scenarios) {
            Json j = {{"scenario_id", s.scenario_id},
                      {"kind", to_string(s.kind)},
                      {"runs", s.runs},
                      {"passes", s.passes},
                      {"passed", s.passed}};
            if (!s.failure_reasons.empty()) j["failure_reasons"] = s.failure_reasons;
            scenarios.push_back(std::move(j));
        }
        modes.push_back({{"mode", to_string(m.mode)},
                         {"kinds", kinds},
                         {"total_rate", round2(m.total_rate)},
                         {"tokens_by_module", tokens},
                         {"scenarios", scenarios}});
    }
    return {{"pass_rule", to_string(report.rule)}, {"all_passed", report.all_passed()}, {"modes", modes}};
}

std::string render_report_table(const EvalReport& report) {
    std::ostringstream out;
    std::map<ScenarioKind, std::int64_t> counts;
    for (const auto& m : report.modes) {
        for (const auto& [kind, k] : m.kinds) counts[kind] = std::max(counts[kind], k.scenarios);
    }
    out << "Success rate (% of runs)\n";
    out << pad("Method", 10);
    for (const auto& [kind, n] : counts) out << pad(to_string(kind) + " (" + std::to_string(n) + ")", 24);
    out << "Total\n";
    for (const auto& m : report.modes) {
        out << pad(to_string(m.mode), 10);
        for (const auto& [kind, n] : counts) {
            auto it = m.kinds.find(kind);
            out << pad(it == m.kinds.end() ? "-" : fmt2(it->second.rate()), 24);
        }
        out << fmt2(m.total_rate) << "\n";
    }

    std::set<std::string> modules;
    for (const auto& m : report.modes) {
        for (const auto& [module, _] : m.tokens_by_module) modules.insert(module);
    }
    out << "\nMean output tokens per call\n" << pad("Module", 22);
    for (const auto& m : report.modes) out << pad(to_string(m.mode), 10);
    out << "\n";
    for (const auto& module : modules) {
        out << pad(module, 22);
        for (const auto& m : report.modes) {
            auto it = m.tokens_by_module.find(module);
            out << pad(it == m.tokens_by_module.end() ? "-" : std::to_string(it->second.rounded_mean()), 10);
        }
        out << "\n";
    }

    out << "\nScenarios (pass rule: " << to_string(report.rule) << ")\n";
    for (const auto& m : report.modes) {
        for (const auto& s : m.scenarios) {
            out << (s.passed ? "PASS " : "FAIL ") << pad(to_string(m.mode), 8) << pad(s.scenario_id, 32) << s.passes
                << "/" << s.runs;
            if (!s.passed && !s.failure_reasons.empty()) out << "  " << s.failure_reasons.front();
            out << "\n";
        }
    }
    return out.str();
}

}  // namespace arq
