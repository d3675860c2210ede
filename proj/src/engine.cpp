#include "arq/engine.hpp"

#include <cstdio>

namespace arq {

void check_config(const EngineConfig& c) {
    if (c.max_iterations < 1) throw Error("max_iterations must be at least 1");
    if (c.batch_size < 1) throw Error("batch_size must be at least 1");
    if (c.max_repairs < 0) throw Error("max_repairs must not be negative");
    for (const ModuleSettings* s : {&c.proposer, &c.tool_caller, &c.message_generator}) {
        check_request(make_request(*s, ""));
    }
}

namespace {

void read_settings(const Json& j, ModuleSettings& s) {
    if (j.contains("model")) s.model = j.at("model").get<std::string>();
    if (j.contains("temperature")) s.temperature = j.at("temperature").get<double>();
    if (j.contains("max_output_tokens")) s.max_output_tokens = j.at("max_output_tokens").get<int>();
}

}  // namespace

EngineConfig engine_config_from_json(const Json& j) {
    EngineConfig c;
    try {
        if (j.contains("mode")) c.mode = reasoning_mode_from(j.at("mode").get<std::string>());
        if (j.contains("max_iterations")) c.max_iterations = j.at("max_iterations").get<int>();
        if (j.contains("batch_size")) {
            const int n = j.at("batch_size").get<int>();
            if (n < 1) throw Error("batch_size must be at least 1");
            c.batch_size = static_cast<std::size_t>(n);
        }
        if (j.contains("max_repairs")) c.max_repairs = j.at("max_repairs").get<int>();
        if (j.contains("parallel_batches")) c.parallel_batches = j.at("parallel_batches").get<bool>();
        if (j.contains("reprompt_unfinished_revisions")) {
            c.reprompt_unfinished_revisions = j.at("reprompt_unfinished_revisions").get<bool>();
        }
        if (j.contains("allow_justified_reexecution")) {
            c.allow_justified_reexecution = j.at("allow_justified_reexecution").get<bool>();
        }
        if (j.contains("modules")) {
            for (auto it = j.at("modules").begin(); it != j.at("modules").end(); ++it) {
                switch (module_from(it.key())) {
                case Module::Proposer: read_settings(it.value(), c.proposer); break;
                case Module::ToolCaller: read_settings(it.value(), c.tool_caller); break;
                case Module::MessageGenerator: read_settings(it.value(), c.message_generator); break;
                case Module::Judge: break;
                }
            }
        }
    } catch (const Json::exception& e) {
        throw Error(std::string("engine config: ") + e.what());
    }
    check_config(c);
    return c;
}

void TurnTrace::record(Module module, const Usage& usage) {
    calls.emplace_back(module, usage);
    usage_by_module[to_string(module)] += usage;
}

Json to_json(const IterationTrace& it) {
    Json proposer = Json::array();
    for (const auto& c : it.proposer_calls) {
        proposer.push_back({{"batch_index", c.batch_index},
                            {"guideline_ids", c.guideline_ids},
                            {"completion", c.completion},
                            {"usage", to_json(c.usage)}});
    }
    Json matches = Json::array();
    for (const auto& m : it.matches) matches.push_back(to_json(m));
    Json tool_calls = Json::array();
    for (const auto& c : it.tool_caller_calls) {
        tool_calls.push_back({{"tool", c.tool_name}, {"completion", c.completion}, {"usage", to_json(c.usage)}});
    }
    Json decisions = Json::array();
    for (const auto& d : it.tool_decisions) {
        Json j = to_json(d.decision);
        j["verdict"] = to_json(d.verdict);
        decisions.push_back(std::move(j));
    }
    Json executed = Json::array();
    for (const auto& r : it.executed) executed.push_back(to_json(r));
    return {{"index", it.index},
            {"guideline_proposer_calls", proposer},
            {"matches", matches},
            {"active_guideline_ids", it.active_ids},
            {"tool_caller_calls", tool_calls},
            {"tool_decisions", decisions},
            {"executed", executed}};
}

Json to_json(const TurnTrace& t) {
    Json iterations = Json::array();
    for (const auto& it : t.iterations) iterations.push_back(to_json(it));
    Json message_calls = Json::array();
    for (const auto& c : t.message_calls) {
        message_calls.push_back({{"completion", c.completion}, {"usage", to_json(c.usage)}});
    }
    Json calls = Json::array();
    Usage total;
    for (const auto& [module, usage] : t.calls) {
        calls.push_back({{"module", to_string(module)}, {"usage", to_json(usage)}});
        total += usage;
    }
    Json by_module = Json::object();
    for (const auto& [module, usage] : t.usage_by_module) by_module[module] = to_json(usage);
    return {{"turn_id", t.turn_id},
            {"mode", to_string(t.mode)},
            {"iterations", iterations},
            {"message", t.message},
            {"message_trace", to_json(t.message_trace)},
            {"message_generator_calls", message_calls},
            {"calls", calls},
            {"usage_by_module", by_module},
            {"total_usage", to_json(total)}};
}

TurnFailedError::TurnFailedError(Module module, std::string message, Json details,
                                 std::map<std::string, Usage> usage)
    : Error(to_string(module) + ": " + message), module_(module), details_(std::move(details)), usage_(std::move(usage)) {}

namespace {

Json failure_details(const std::vector<Violation>& violations, const Usage& usage) {
    Json v = Json::array();
    for (const auto& x : violations) v.push_back(to_json(x));
    return {{"violations", v}, {"usage", to_json(usage)}};
}

}  // namespace

TurnTrace run_turn(const Session& session, const AgentDefinition& def, const ToolRegistry& registry,
                   const EngineBackends& backends, const EngineConfig& config, ReasoningMode mode,
                   const std::string& turn_id, const PromptAssets* assets) {
    check_config(config);
    TurnTrace trace;
    trace.turn_id = turn_id;
    trace.mode = mode;

    ProposerConfig pc;
    pc.settings = config.proposer;
    pc.batch_size = config.batch_size;
    pc.max_repairs = config.max_repairs;
    pc.parallel_batches = config.parallel_batches;
    pc.assets = assets;

    ToolCallerConfig tc;
    tc.settings = config.tool_caller;
    tc.max_repairs = config.max_repairs;
    tc.assets = assets;

    const ExecutionPolicy policy{config.allow_justified_reexecution};
    std::vector<ToolResult> staged;

    for (int i = 1; i <= config.max_iterations; ++i) {
        IterationTrace it;
        it.index = i;

        ProposerResult pr = propose_guidelines(session, def, staged, mode, *backends.proposer, pc);
        for (const auto& c : pr.calls) trace.record(Module::Proposer, c.usage);
        for (const auto& f : pr.failures) trace.record(Module::Proposer, f.usage);
        if (!pr.ok()) {
            Json batches = Json::array();
            for (const auto& f : pr.failures) {
                Json d = failure_details(f.violations, f.usage);
                d["batch_index"] = f.batch_index;
                d["guideline_ids"] = f.guideline_ids;
                d["error"] = f.error;
                batches.push_back(std::move(d));
            }
            throw TurnFailedError(Module::Proposer, pr.failures.front().error,
                                  {{"iteration", i}, {"failed_batches", batches}}, trace.usage_by_module);
        }
        it.proposer_calls = pr.calls;
        it.matches = pr.matches;
        it.active_ids = pr.active_ids();

        ToolCallerResult tr =
            infer_tool_calls(session, def, it.active_ids, staged, mode, *backends.tool_caller, i, tc);
        for (const auto& c : tr.calls) trace.record(Module::ToolCaller, c.usage);
        for (const auto& f : tr.failures) trace.record(Module::ToolCaller, f.usage);
        if (!tr.ok()) {
            Json tools = Json::array();
            for (const auto& f : tr.failures) {
                Json d = failure_details(f.violations, f.usage);
                d["tool"] = f.tool_name;
                d["error"] = f.error;
                tools.push_back(std::move(d));
            }
            throw TurnFailedError(Module::ToolCaller, tr.failures.front().error,
                                  {{"iteration", i}, {"failed_tools", tools}}, trace.usage_by_module);
        }
        it.tool_caller_calls = tr.calls;

        for (const auto& d : tr.decisions) {
            const ToolDescriptor* tool = def.find_tool(d.tool_name);
            if (!tool) throw TurnFailedError(Module::ToolCaller, "unknown tool " + d.tool_name, Json::object(), trace.usage_by_module);
            ExecutionVerdict verdict = decide_execution(d, *tool, staged, policy);
            if (verdict.execute()) {
                ToolResult r = registry.execute(d.tool_name, d.arguments());
                staged.push_back(r);
                it.executed.push_back(std::move(r));
            }
            it.tool_decisions.push_back({d, std::move(verdict)});
        }
        const bool executed_any = !it.executed.empty();
        trace.iterations.push_back(std::move(it));
        if (!executed_any) break;
    }

    // The last proposition pass decides which guidelines reach the reply.
    std::vector<GuidelineMatch> active;
    for (const auto& m : trace.iterations.back().matches) {
        if (decide_activation(m) == Activation::Active) active.push_back(m);
    }

    MessageGeneratorConfig mc;
    mc.settings = config.message_generator;
    mc.max_repairs = config.max_repairs;
    mc.reprompt_unfinished = config.reprompt_unfinished_revisions;
    mc.assets = assets;
    try {
        GenerationResult g = generate_message(session, def, active, staged, mode, *backends.message_generator, mc);
        for (const auto& c : g.calls) trace.record(Module::MessageGenerator, c.usage);
        trace.message = g.text;
        trace.message_trace = std::move(g.trace);
        trace.message_calls = std::move(g.calls);
    } catch (const StructuredCompletionError& e) {
        trace.record(Module::MessageGenerator, e.usage());
        throw TurnFailedError(Module::MessageGenerator, e.what(), failure_details(e.violations(), e.usage()),
                              trace.usage_by_module);
    } catch (const Error& e) {
        throw TurnFailedError(Module::MessageGenerator, e.what(), Json::object(), trace.usage_by_module);
    }
    return trace;
}

Engine::Engine(std::shared_ptr<SessionStore> store, EngineBackends backends, EngineConfig config,
               const PromptAssets* assets)
    : store_(std::move(store)), backends_(std::move(backends)), config_(config), assets_(assets),
      rng_(std::random_device{}()) {
    if (!store_) throw Error("engine needs a session store");
    if (!backends_.proposer || !backends_.tool_caller || !backends_.message_generator) {
        throw Error("engine needs a backend for every module");
    }
    check_config(config_);
}

std::string Engine::new_id(const std::string& prefix) {
    std::lock_guard lock(id_mutex_);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng_()));
    return prefix + "-" + buf;
}

std::string Engine::create_agent(const AgentDefinition& def, std::optional<std::string> id) {
    const auto violations = validate_agent_definition(def);
    if (!violations.empty()) throw InvalidAgentError(violations);
    std::string agent_id = id ? *id : new_id("agent");
    if (!is_valid_id(agent_id)) throw Error("invalid agent id '" + agent_id + "'");
    std::lock_guard lock(locks_mutex_);
    try {
        store_->load_agent(agent_id);
        throw ConflictError("agent " + agent_id + " already exists");
    } catch (const UnknownAgentError&) {
    }
    store_->save_agent(agent_id, def);
    return agent_id;
}

AgentDefinition Engine::get_agent(const std::string& id) const { return store_->load_agent(id); }

std::string Engine::create_session(const std::string& agent_id, std::vector<Event> history) {
    store_->load_agent(agent_id);
    SessionRecord rec;
    rec.session.id = new_id("session");
    rec.session.agent_id = agent_id;
    rec.session.events = std::move(history);
    store_->save_session(rec);
    return rec.session.id;
}

Session Engine::get_session(const std::string& id) const { return store_->load_session(id).session; }

Json Engine::get_trace(const std::string& session_id, const std::string& turn_id) const {
    const SessionRecord rec = store_->load_session(session_id);
    auto it = rec.traces.find(turn_id);
    if (it == rec.traces.end()) throw UnknownSessionError(session_id + " turn " + turn_id);
    return it->second;
}

std::shared_ptr<std::mutex> Engine::session_lock(const std::string& id) {
    std::lock_guard lock(locks_mutex_);
    auto& m = session_locks_[id];
    if (!m) m = std::make_shared<std::mutex>();
    return m;
}

TurnOutcome Engine::process_turn(const std::string& session_id, const std::string& text,
                                 std::optional<ReasoningMode> mode) {
    auto lock_ptr = session_lock(session_id);
    std::lock_guard lock(*lock_ptr);

    SessionRecord rec = store_->load_session(session_id);
    const AgentDefinition def = store_->load_agent(rec.session.agent_id);
    const std::string turn_id = "turn-" + std::to_string(rec.traces.size() + 1);

    Session working = append_event(rec.session, CustomerMessage{text});
    TurnTrace trace = run_turn(working, def, ToolRegistry(def.tools), backends_, config_, mode.value_or(config_.mode),
                               turn_id, assets_);

    // Nothing is written before this point, so a failed turn leaves the session untouched.
    for (const auto& it : trace.iterations) {
        for (const auto& r : it.executed) working = append_event(std::move(working), r);
    }
    AgentMessage reply{trace.message, turn_id};
    working = append_event(std::move(working), reply);
    working.staged_calls.clear();
    rec.session = std::move(working);
    rec.traces[turn_id] = to_json(trace);
    store_->save_session(rec);
    return {turn_id, reply, std::move(trace)};
}

}  // namespace arq
