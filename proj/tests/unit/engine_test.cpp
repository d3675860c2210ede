#include "arq/engine.hpp"
#include "arq/eval.hpp"

#include "fixtures.hpp"

#include <gtest/gtest.h>

using namespace arq;
using namespace arq::testing;

namespace {

TestScenario geolocation() {
    return load_scenarios(source_path("corpus/sample/06_geolocation_metric.json")).at(0);
}

struct GeoRun {
    TurnOutcome outcome;
    Session session;
};

GeoRun run_geolocation() {
    const auto s = geolocation();
    auto engine = Engine(std::make_shared<MemoryStore>(),
                         EngineBackends::shared(std::make_shared<ScriptedBackend>(s.scripts.at("arq"))));
    const auto agent = engine.create_agent(agent_with_fixtures(s), "geo");
    std::vector<Event> seeded(s.history.begin(), s.history.end() - 1);
    const auto sid = engine.create_session(agent, seeded);
    GeoRun r{engine.process_turn(sid, std::get<CustomerMessage>(s.history.back()).text), {}};
    r.session = engine.get_session(sid);
    return r;
}

AgentDefinition drinks_agent() {
    AgentDefinition def;
    def.guidelines = {guideline("g_greet", "greets", "greet back"), guideline("g_drink", "asks for drinks", "check stock", {"check_stock"})};
    ToolDescriptor t;
    t.name = "check_stock";
    t.parameters = {{"item", ParamType::String, {}, "", true}};
    t.binding = ScriptedBinding{{}, Json{{"in_stock", true}}};
    def.tools = {t};
    return def;
}

Json drinks_proposal(int greet, int drink) {
    const auto def = drinks_agent();
    return proposer_completion({proposer_check(def.guidelines[0], greet >= 6, greet), proposer_check(def.guidelines[1], drink >= 6, drink)});
}

}  // namespace

TEST(Engine, GeolocationTurnRunsTwoIterations) {
    const auto r = run_geolocation();
    const auto& trace = r.outcome.trace;
    ASSERT_EQ(trace.iterations.size(), 2u);
    EXPECT_EQ(trace.iterations[0].active_ids, std::vector<std::string>{"g_geo"});
    ASSERT_EQ(trace.iterations[0].executed.size(), 1u);
    EXPECT_EQ(trace.iterations[0].executed[0].tool, "get_location");
    EXPECT_EQ(trace.iterations[0].executed[0].result["continent"], "Europe");
    const auto& second = trace.iterations[1].active_ids;
    EXPECT_NE(std::find(second.begin(), second.end(), "g_metric"), second.end());
    EXPECT_TRUE(trace.iterations[1].executed.empty());
    EXPECT_NE(r.outcome.agent_message.text.find("km"), std::string::npos) << r.outcome.agent_message.text;

    // History: seeded events, customer message, tool result, agent message.
    ASSERT_GE(r.session.events.size(), 3u);
    const auto n = r.session.events.size();
    EXPECT_TRUE(std::holds_alternative<CustomerMessage>(r.session.events[n - 3]));
    EXPECT_TRUE(std::holds_alternative<ToolResult>(r.session.events[n - 2]));
    EXPECT_EQ(std::get<AgentMessage>(r.session.events[n - 1]).trace_ref, r.outcome.turn_id);
}

TEST(Engine, GeolocationIsDeterministic) {
    const auto first = run_geolocation();
    const std::string reference = canonical_json(to_json(first.outcome.trace));
    for (int i = 0; i < 4; ++i) {
        const auto again = run_geolocation();
        EXPECT_EQ(canonical_json(to_json(again.outcome.trace)), reference);
        // Session ids are random; everything else must match.
        auto a = again.session, b = first.session;
        a.id = b.id = "";
        EXPECT_EQ(canonical_json(to_json(a)), canonical_json(to_json(b)));
    }
}

TEST(Engine, NoActivationMeansOneIteration) {
    auto backend = std::make_shared<ScriptedBackend>(
        std::vector<ScriptEntry>{seq(drinks_proposal(2, 1)), seq(message_completion(revision_chain(1)))});
    Engine engine(std::make_shared<MemoryStore>(), EngineBackends::shared(backend));
    const auto sid = engine.create_session(engine.create_agent(drinks_agent()));
    const auto out = engine.process_turn(sid, "what's the weather?");
    EXPECT_EQ(out.trace.iterations.size(), 1u);
    EXPECT_TRUE(out.trace.iterations[0].active_ids.empty());
    EXPECT_EQ(backend->call_count(), 2u);
    EXPECT_EQ(out.turn_id, "turn-1");
}

TEST(Engine, IterationsAreBounded) {
    std::vector<ScriptEntry> script;
    for (int i = 0; i < 2; ++i) {
        script.push_back(seq(drinks_proposal(1, 9)));
        script.push_back(seq(tool_completion("check_stock", {tool_call(9, true, {{"item", "drink" + std::to_string(i)}})})));
    }
    script.push_back(seq(message_completion(revision_chain(1))));
    EngineConfig cfg;
    cfg.max_iterations = 2;
    auto backend = std::make_shared<ScriptedBackend>(script);
    Engine engine(std::make_shared<MemoryStore>(), EngineBackends::shared(backend), cfg);
    const auto sid = engine.create_session(engine.create_agent(drinks_agent()));
    const auto out = engine.process_turn(sid, "two drinks");
    EXPECT_EQ(out.trace.iterations.size(), 2u);
    EXPECT_EQ(backend->call_count(), 5u);
    EXPECT_EQ(engine.get_session(sid).events.size(), 4u);  // customer, 2 tool results, agent
}

TEST(Engine, DuplicateCallsAreNotRepeated) {
    std::vector<ScriptEntry> script;
    for (int i = 0; i < 2; ++i) {
        script.push_back(seq(drinks_proposal(1, 9)));
        script.push_back(seq(tool_completion("check_stock", {tool_call(9, true, {{"item", "sprite"}}, i > 0)})));
    }
    script.push_back(seq(message_completion(revision_chain(1))));
    Engine engine(std::make_shared<MemoryStore>(), EngineBackends::shared(std::make_shared<ScriptedBackend>(script)));
    const auto sid = engine.create_session(engine.create_agent(drinks_agent()));
    const auto out = engine.process_turn(sid, "a sprite");
    ASSERT_EQ(out.trace.iterations.size(), 2u);
    EXPECT_EQ(out.trace.iterations[1].tool_decisions[0].verdict.reason, "duplicate");
}

TEST(Engine, FailedTurnLeavesSessionUntouched) {
    auto backend = std::make_shared<ScriptedBackend>(std::vector<ScriptEntry>{seq("junk", 3), seq("junk", 3), seq("junk", 3)});
    Engine engine(std::make_shared<MemoryStore>(), EngineBackends::shared(backend));
    const auto sid = engine.create_session(engine.create_agent(drinks_agent()), {CustomerMessage{"hi"}, AgentMessage{"hello", ""}});
    const std::string before = canonical_json(to_json(engine.get_session(sid)));
    try {
        engine.process_turn(sid, "a sprite");
        FAIL();
    } catch (const TurnFailedError& e) {
        EXPECT_EQ(e.module(), Module::Proposer);
        EXPECT_EQ(e.usage_by_module().at("guideline_proposer").output_tokens, 9);
    }
    EXPECT_EQ(canonical_json(to_json(engine.get_session(sid))), before);
    EXPECT_THROW(engine.get_trace(sid, "turn-1"), UnknownSessionError);
}

TEST(Engine, MessageFailureAlsoRollsBack) {
    std::vector<ScriptEntry> script = {seq(drinks_proposal(1, 9)),
                                       seq(tool_completion("check_stock", {tool_call(9, true, {{"item", "sprite"}})})),
                                       seq(drinks_proposal(1, 9)),
                                       seq(tool_completion("check_stock", {tool_call(9, false, {{"item", "sprite"}}, true)})),
                                       seq("x"), seq("y"), seq("z")};
    Engine engine(std::make_shared<MemoryStore>(), EngineBackends::shared(std::make_shared<ScriptedBackend>(script)));
    const auto sid = engine.create_session(engine.create_agent(drinks_agent()));
    EXPECT_THROW(engine.process_turn(sid, "a sprite"), TurnFailedError);
    EXPECT_TRUE(engine.get_session(sid).events.empty());
}

TEST(Engine, UsageTotalsMatchCalls) {
    const auto r = run_geolocation();
    std::map<std::string, Usage> sums;
    for (const auto& [module, usage] : r.outcome.trace.calls) sums[to_string(module)] += usage;
    EXPECT_EQ(sums, r.outcome.trace.usage_by_module);
    EXPECT_EQ(r.outcome.trace.calls.size(), 5u);
    const Json j = to_json(r.outcome.trace);
    std::int64_t total = 0;
    for (const auto& [m, u] : sums) total += u.output_tokens;
    EXPECT_EQ(j["total_usage"]["output_tokens"], total);
}

TEST(Engine, TracesArePersistedPerTurn) {
    std::vector<ScriptEntry> script;
    for (int i = 0; i < 2; ++i) {
        script.push_back(seq(drinks_proposal(9, 1)));
        script.push_back(seq(message_completion(revision_chain(1, "hello " + std::to_string(i) + " "))));
    }
    Engine engine(std::make_shared<MemoryStore>(), EngineBackends::shared(std::make_shared<ScriptedBackend>(script)));
    const auto sid = engine.create_session(engine.create_agent(drinks_agent()));
    EXPECT_EQ(engine.process_turn(sid, "hi").turn_id, "turn-1");
    EXPECT_EQ(engine.process_turn(sid, "hi again").turn_id, "turn-2");
    EXPECT_EQ(engine.get_trace(sid, "turn-2")["turn_id"], "turn-2");
    EXPECT_EQ(engine.get_session(sid).events.size(), 4u);
}

TEST(Engine, AgentIdsAndValidation) {
    Engine engine(std::make_shared<MemoryStore>(), EngineBackends::shared(std::make_shared<ScriptedBackend>(std::vector<ScriptEntry>{})));
    EXPECT_EQ(engine.create_agent(drinks_agent(), "pizza"), "pizza");
    EXPECT_THROW(engine.create_agent(drinks_agent(), "pizza"), ConflictError);
    auto bad = drinks_agent();
    bad.guidelines[1].tool_ids = {"nope"};
    EXPECT_THROW(engine.create_agent(bad), InvalidAgentError);
    EXPECT_THROW(engine.create_session("ghost"), UnknownAgentError);
    EXPECT_THROW(engine.process_turn("ghost", "hi"), UnknownSessionError);
}

TEST(EngineConfig, ParsesAndChecks) {
    const auto c = engine_config_from_json(
        {{"mode", "cot"}, {"max_iterations", 2}, {"modules", {{"proposer", {{"model", "m"}, {"temperature", 0.5}}}}}});
    EXPECT_EQ(c.mode, ReasoningMode::Cot);
    EXPECT_EQ(c.max_iterations, 2);
    EXPECT_EQ(c.proposer.model, "m");
    EXPECT_THROW(engine_config_from_json({{"max_iterations", 0}}), Error);
    EXPECT_THROW(engine_config_from_json({{"mode", "tree"}}), Error);
}
