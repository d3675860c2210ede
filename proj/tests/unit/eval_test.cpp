#include "arq/eval.hpp"

#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

using namespace arq;
using namespace arq::testing;
namespace fs = std::filesystem;

namespace {

Json minimal_guideline_scenario() {
    return {{"id", "mini"},
            {"kind", "guideline_only"},
            {"agent", {{"guidelines", {{{"id", "g1"}, {"condition", "c"}, {"action", "a"}}}}}},
            {"history", {{{"kind", "customer_message"}, {"text", "hi"}}}},
            {"expected_guideline_ids", {"g1"}}};
}

std::string scenario_error(const Json& j) {
    try {
        scenario_from_json(j, "mini.json");
    } catch (const ScenarioError& e) {
        return e.what();
    }
    return "";
}

TurnTrace trace_with(std::vector<ToolResult> executed) {
    TurnTrace t;
    IterationTrace it;
    it.executed = std::move(executed);
    t.iterations.push_back(it);
    return t;
}

std::vector<TestScenario> sample_corpus() { return load_scenarios(source_path("corpus/sample")); }

}  // namespace

TEST(Scenarios, SampleCorpusLoads) {
    const auto all = sample_corpus();
    EXPECT_EQ(all.size(), 10u);
    EXPECT_TRUE(std::any_of(all.begin(), all.end(), [](const auto& s) { return s.kind == ScenarioKind::Comprehensive; }));
    EXPECT_TRUE(std::is_sorted(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.source < b.source; }));
}

TEST(Scenarios, DiagnosticsNameSourceScenarioAndField) {
    Json j = minimal_guideline_scenario();
    j["expected_guideline_ids"] = {"g9"};
    const std::string e = scenario_error(j);
    EXPECT_NE(e.find("mini.json"), std::string::npos) << e;
    EXPECT_NE(e.find("scenario mini"), std::string::npos) << e;
    EXPECT_NE(e.find("field 'expected_guideline_ids'"), std::string::npos) << e;
    EXPECT_NE(e.find("g9"), std::string::npos) << e;
}

TEST(Scenarios, KindInvariant) {
    Json j = minimal_guideline_scenario();
    j["success_criteria"] = {"greets"};
    EXPECT_NE(scenario_error(j).find("success_criteria"), std::string::npos);

    j = minimal_guideline_scenario();
    j["kind"] = "comprehensive";
    EXPECT_NE(scenario_error(j).find("expected_guideline_ids"), std::string::npos);
    j.erase("expected_guideline_ids");
    EXPECT_NE(scenario_error(j).find("success_criteria"), std::string::npos);
    j["success_criteria"] = {"greets"};
    EXPECT_EQ(scenario_error(j), "");
}

TEST(Scenarios, OtherValidation) {
    Json j = minimal_guideline_scenario();
    j["history"] = {{{"kind", "agent_message"}, {"text", "hello"}}};
    EXPECT_NE(scenario_error(j).find("must end with a customer message"), std::string::npos);
    j = minimal_guideline_scenario();
    j["scripted"] = {{"gpt", Json::array()}};
    EXPECT_NE(scenario_error(j).find("scripted.gpt"), std::string::npos);
    j = minimal_guideline_scenario();
    j["tool_fixtures"] = {{{"tool", "nope"}, {"result", 1}}};
    EXPECT_NE(scenario_error(j).find("unknown tool nope"), std::string::npos);
    j = minimal_guideline_scenario();
    j["kind"] = "vibes";
    EXPECT_NE(scenario_error(j).find("kind"), std::string::npos);
}

TEST(Scenarios, DuplicateIdsInDirectoryAreRejected) {
    const auto dir = fs::temp_directory_path() / "arq-dup-scenarios";
    fs::remove_all(dir);
    fs::create_directories(dir);
    for (const char* name : {"a.json", "b.json"}) std::ofstream(dir / name) << minimal_guideline_scenario().dump();
    EXPECT_THROW(load_scenarios(dir.string()), ScenarioError);
    fs::remove_all(dir);
    EXPECT_THROW(load_scenarios(dir.string()), ScenarioError);
}

TEST(Scoring, ExactSetEquality) {
    EXPECT_TRUE(score_guideline_scenario({"a", "b"}, {"b", "a"}));
    EXPECT_FALSE(score_guideline_scenario({"a"}, {"a", "b"}));
    EXPECT_FALSE(score_guideline_scenario({"a", "b", "c"}, {"a", "b"}));
    EXPECT_TRUE(score_guideline_scenario({}, {}));
}

TEST(StructuralCriteria, InvokedWithAndNotInvoked) {
    AgentDefinition def;
    ToolDescriptor t;
    t.name = "check_stock";
    t.parameters = {{"item", ParamType::String, {}, "", true}};
    def.tools = {t};
    const auto trace = trace_with({{"check_stock", "{\"item\":\"sprite\"}", {{"in_stock", true}}}});

    EXPECT_TRUE(check_structural_criterion("tool:check_stock invoked", trace, def)->satisfied);
    EXPECT_TRUE(check_structural_criterion("tool:check_stock invoked with {\"item\": \"sprite\"}", trace, def)->satisfied);
    EXPECT_FALSE(check_structural_criterion("tool:check_stock invoked with {\"item\": \"fanta\"}", trace, def)->satisfied);
    EXPECT_FALSE(check_structural_criterion("tool:check_stock not invoked", trace, def)->satisfied);
    EXPECT_TRUE(check_structural_criterion("tool:book_table not invoked", trace, def)->satisfied);
    EXPECT_FALSE(check_structural_criterion("tool:check_stock invoked with [1]", trace, def)->satisfied);
    EXPECT_FALSE(check_structural_criterion("mentions sprite", trace, def).has_value());

    // Missing required parameters never count as an invocation.
    const auto bad = trace_with({{"check_stock", "{}", nullptr}});
    EXPECT_FALSE(check_structural_criterion("tool:check_stock invoked", bad, def)->satisfied);
}

TEST(Judge, VerdictAndJudgeError) {
    const Session s = session_with({CustomerMessage{"hi"}, AgentMessage{"hello", ""}});
    ScriptedBackend yes({on("greets warmly", Json{{"quoted_evidence", "hello"}, {"criterion_satisfied", true}})});
    const auto r = judge_criterion(s, "hello", TurnTrace{}, AgentDefinition{}, "greets warmly", yes);
    EXPECT_TRUE(r.satisfied);
    EXPECT_FALSE(r.structural);
    EXPECT_EQ(r.rationale, "hello");
    EXPECT_EQ(yes.requests()[0].temperature, 0.0);

    ScriptedBackend junk({seq("maybe?"), seq("maybe?"), seq("maybe?")});
    const auto e = judge_criterion(s, "hello", TurnTrace{}, AgentDefinition{}, "greets warmly", junk);
    EXPECT_FALSE(e.satisfied);
    EXPECT_EQ(e.reason, "judge-error");
    EXPECT_EQ(junk.call_count(), 3u);
}

TEST(Aggregation, WeightedTotalsReproduceTheComparisonTable) {
    struct Row {
        double guideline_rate, comprehensive_rate, total;
    };
    for (const Row& row : {Row{70.43, 85.31, 81.54}, Row{80.87, 87.81, 86.05}, Row{84.24, 92.19, 90.17}}) {
        const double total = weighted_total_rate({{22, row.guideline_rate}, {65, row.comprehensive_rate}});
        // Oracle: (22 a + 65 b) / 87 computed by hand.
        EXPECT_NEAR(total, (22 * row.guideline_rate + 65 * row.comprehensive_rate) / 87.0, 1e-9);
        EXPECT_NEAR(total, row.total, 0.02);
    }
    EXPECT_THROW(weighted_total_rate({{0, 50.0}}), EmptyGroupError);
}

TEST(Aggregation, PassRules) {
    EXPECT_TRUE(passes(PassRule::Majority, 3, 5));
    EXPECT_FALSE(passes(PassRule::Majority, 2, 4));
    EXPECT_TRUE(passes(PassRule::All, 5, 5));
    EXPECT_FALSE(passes(PassRule::All, 0, 0));
    EXPECT_TRUE(passes(PassRule::Any, 1, 5));
    EXPECT_EQ(pass_rule_from("all"), PassRule::All);
    EXPECT_THROW(pass_rule_from("most"), Error);
}

TEST(Aggregation, ReportIsIndependentOfResultOrder) {
    std::vector<RunResult> results;
    std::mt19937_64 rng(5);
    for (const std::string id : {"a", "b", "c"}) {
        for (int rep = 1; rep <= 5; ++rep) {
            RunResult r;
            r.scenario_id = id;
            r.kind = id == "a" ? ScenarioKind::GuidelineOnly : ScenarioKind::Comprehensive;
            r.repetition = rep;
            r.passed = rng() % 3 != 0;
            r.calls = {{Module::Proposer, Usage{10, static_cast<std::int64_t>(rng() % 400), 0}},
                       {Module::MessageGenerator, Usage{10, static_cast<std::int64_t>(rng() % 400), 0}}};
            results.push_back(r);
        }
    }
    const std::string reference = canonical_json(to_json(aggregate_report(results)));
    for (int i = 0; i < 20; ++i) {
        std::shuffle(results.begin(), results.end(), rng);
        EXPECT_EQ(canonical_json(to_json(aggregate_report(results))), reference);
    }
}

TEST(Aggregation, TokenMeansMatchScriptedCounts) {
    std::vector<RunResult> results;
    for (std::int64_t tokens : {300, 280, 287}) {
        RunResult r;
        r.scenario_id = "s" + std::to_string(tokens);
        r.calls = {{Module::Proposer, Usage{0, tokens, 0}}};
        results.push_back(r);
    }
    RunResult direct;
    direct.scenario_id = "d";
    direct.mode = ReasoningMode::Direct;
    direct.calls = {{Module::MessageGenerator, Usage{0, 54, 0}}};
    results.push_back(direct);
    const auto report = aggregate_report(results);
    ASSERT_EQ(report.modes.size(), 2u);
    EXPECT_EQ(report.modes[0].tokens_by_module.at("guideline_proposer").rounded_mean(), 289);
    EXPECT_EQ(report.modes[1].tokens_by_module.at("message_generator").rounded_mean(), 54);
    EXPECT_NE(render_report_table(report).find("289"), std::string::npos);
}

TEST(Evaluation, RepetitionsProduceOneRecordEach) {
    const auto corpus = sample_corpus();
    const auto results = run_scenario(corpus.front(), ReasoningMode::Arq, 5, scripted_provider());
    ASSERT_EQ(results.size(), 5u);
    for (int i = 0; i < 5; ++i) {
        EXPECT_EQ(results[static_cast<std::size_t>(i)].repetition, i + 1);
        EXPECT_TRUE(results[static_cast<std::size_t>(i)].passed) << results[static_cast<std::size_t>(i)].reason;
    }
}

TEST(Evaluation, OrderedWhateverTheParallelism) {
    const auto corpus = sample_corpus();
    EvalOptions serial;
    serial.modes = {ReasoningMode::Arq, ReasoningMode::Direct};
    serial.repetitions = 2;
    serial.parallelism = 1;
    EvalOptions parallel = serial;
    parallel.parallelism = 4;
    const auto a = run_evaluation(corpus, scripted_provider(), serial);
    const auto b = run_evaluation(corpus, scripted_provider(), parallel);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(canonical_json(to_json(a[i])), canonical_json(to_json(b[i])));
}

TEST(Evaluation, MissingScriptFailsTheRunNotTheHarness) {
    auto s = sample_corpus().front();
    s.scripts.erase("cot");
    const auto r = run_scenario(s, ReasoningMode::Cot, 1, scripted_provider());
    ASSERT_EQ(r.size(), 1u);
    EXPECT_FALSE(r[0].passed);
    EXPECT_NE(r[0].reason.find("no 'cot' script"), std::string::npos) << r[0].reason;
}

TEST(Evaluation, FailedCriterionIsReported) {
    auto corpus = sample_corpus();
    auto it = std::find_if(corpus.begin(), corpus.end(), [](const auto& s) { return s.id.find("geolocation") != std::string::npos; });
    ASSERT_NE(it, corpus.end());
    it->success_criteria.push_back("tool:get_location not invoked");
    const auto r = run_scenario(*it, ReasoningMode::Arq, 1, scripted_provider());
    EXPECT_FALSE(r[0].passed);
    EXPECT_NE(r[0].reason.find("tool:get_location not invoked"), std::string::npos);
}
