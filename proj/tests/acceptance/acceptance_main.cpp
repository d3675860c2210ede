// One PASS/FAIL/SKIP line per acceptance criterion. Exit status 1 if any fails.

#include "arq/blueprint.hpp"
#include "arq/engine.hpp"
#include "arq/eval.hpp"
#include "arq/gateway.hpp"
#include "arq/guideline_proposer.hpp"
#include "arq/message_generator.hpp"

#include "blueprint_gen.hpp"
#include "fixtures.hpp"
#include "gating_gen.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>

using namespace arq;
using namespace arq::testing;

namespace {

struct Outcome {
    enum class Status { Pass, Fail, Skip } status = Status::Pass;
    std::string detail;
};

Outcome pass(std::string d) { return {Outcome::Status::Pass, std::move(d)}; }
Outcome fail(std::string d) { return {Outcome::Status::Fail, std::move(d)}; }
Outcome skip(std::string d) { return {Outcome::Status::Skip, std::move(d)}; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int digits = 2) {
    std::ostringstream o;
    o.setf(std::ios::fixed);
    o.precision(digits);
    o << v;
    return o.str();
}

Outcome activation_truth_table() {
    const auto t0 = std::chrono::steady_clock::now();
    int combos = 0, mismatches = 0;
    for (int score = 1; score <= 10; ++score) {
        for (const std::string prev : {"no", "partially", "fully"}) {
            for (const bool reapply : {true, false}) {
                ++combos;
                const bool expected = score >= 6 && (prev == "no" || reapply);
                const auto m = guideline_match_from_json(proposer_check(guideline("g", "c", "a"), true, score, prev, reapply));
                if ((decide_activation(m) == Activation::Active) != expected) ++mismatches;
            }
        }
    }
    const double secs = seconds_since(t0);
    const std::string d = std::to_string(combos) + " combinations, " + std::to_string(mismatches) + " mismatches, " +
                          fmt(secs, 3) + "s";
    return mismatches == 0 && combos == 60 && secs < 1.0 ? pass(d) : fail(d);
}

Outcome comparison_table_totals() {
    struct Row {
        double a, b, total;
    };
    std::string d;
    bool ok = true;
    for (const Row& r : {Row{70.43, 85.31, 81.54}, Row{80.87, 87.81, 86.05}, Row{84.24, 92.19, 90.17}}) {
        const double total = weighted_total_rate({{22, r.a}, {65, r.b}});
        ok = ok && std::fabs(total - r.total) <= 0.02;
        d += (d.empty() ? "" : ", ") + fmt(total) + " vs " + fmt(r.total);
    }
    return ok ? pass(d) : fail(d);
}

Outcome token_accounting() {
    auto base = load_scenarios(source_path("corpus/sample/01_greeting.json")).at(0);
    std::vector<TestScenario> scenarios;
    for (std::int64_t tokens : {300, 280, 287}) {
        TestScenario s = base;
        s.id = "tokens-" + std::to_string(tokens);
        for (auto& e : s.scripts.at("arq")) e.output_tokens = tokens;
        for (auto& e : s.scripts.at("direct")) e.output_tokens = 54;
        scenarios.push_back(s);
    }
    EvalOptions opts;
    opts.modes = {ReasoningMode::Arq, ReasoningMode::Direct};
    opts.repetitions = 5;
    const auto report = aggregate_report(run_evaluation(scenarios, scripted_provider(), opts));
    const auto& arq = report.modes.at(0).tokens_by_module.at("guideline_proposer");
    const auto& direct = report.modes.at(1).tokens_by_module.at("guideline_proposer");
    const std::string d = "proposer/arq mean " + std::to_string(arq.rounded_mean()) + " (exact " + fmt(arq.mean()) +
                          "), proposer/direct mean " + std::to_string(direct.rounded_mean());
    return arq.rounded_mean() == 289 && arq.mean() == 289.0 && direct.rounded_mean() == 54 ? pass(d) : fail(d);
}

Outcome blueprint_properties() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(20240601);
    int round_trip_failures = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto bp = random_blueprint(rng);
        const Json obj = conforming_object(bp, rng);
        const auto r = parse_completion(bp, wrap_in_prose(obj, rng));
        if (!r.ok() || r.completion->object != obj || r.completion->answers != reference_leaves(bp, obj)) ++round_trip_failures;
    }
    int mutation_failures = 0, mutations = 0;
    std::map<Violation::Kind, int> kinds;
    while (mutations < 1000) {
        const auto bp = random_blueprint(rng);
        Mutation m;
        if (!mutate(bp, conforming_object(bp, rng), rng, m)) continue;
        ++mutations;
        ++kinds[m.expected];
        bool found = false;
        for (const auto& v : validate_object(bp, m.mutated)) found = found || (v.kind == m.expected && v.path == m.path);
        if (!found) ++mutation_failures;
    }
    const double secs = seconds_since(t0);
    std::string d = "1000 round trips (" + std::to_string(round_trip_failures) + " failed), 1000 mutations (" +
                    std::to_string(mutation_failures) + " missed; ";
    for (const auto& [k, n] : kinds) d += to_string(k) + "=" + std::to_string(n) + " ";
    d += "), " + fmt(secs) + "s";
    return round_trip_failures == 0 && mutation_failures == 0 && secs < 30.0 ? pass(d) : fail(d);
}

Outcome end_to_end_determinism() {
    const auto s = load_scenarios(source_path("corpus/sample/06_geolocation_metric.json")).at(0);
    std::string reference;
    for (int run = 1; run <= 5; ++run) {
        Engine engine(std::make_shared<MemoryStore>(), EngineBackends::shared(std::make_shared<ScriptedBackend>(s.scripts.at("arq"))));
        const auto agent = engine.create_agent(agent_with_fixtures(s), "geo");
        const auto sid = engine.create_session(agent, std::vector<Event>(s.history.begin(), s.history.end() - 1));
        const auto out = engine.process_turn(sid, std::get<CustomerMessage>(s.history.back()).text);
        const auto& its = out.trace.iterations;
        if (its.size() != 2) return fail("run " + std::to_string(run) + " had " + std::to_string(its.size()) + " iterations");
        auto has_metric = [](const IterationTrace& it) {
            return std::find(it.active_ids.begin(), it.active_ids.end(), "g_metric") != it.active_ids.end();
        };
        if (has_metric(its[0]) || !has_metric(its[1])) return fail("g_metric not active only in iteration 2");
        const std::string text = canonical_json(to_json(out.trace));
        if (run == 1) reference = text;
        else if (text != reference) return fail("trace of run " + std::to_string(run) + " differs");
    }
    return pass("5 identical traces (" + std::to_string(reference.size()) + " bytes), 2 iterations, g_metric in iteration 2 only");
}

Outcome tool_gating() {
    std::mt19937_64 rng(11);
    GatingStats stats;
    for (int i = 0; i < 500; ++i) {
        const std::string problem = gating_round(rng, &stats);
        if (!problem.empty()) return fail("round " + std::to_string(i) + ": " + problem);
    }
    return pass("500 random turns, " + std::to_string(stats.executed) + " executions, " +
                std::to_string(stats.duplicates_skipped) + " duplicates skipped, none ungated");
}

Outcome revision_bounds() {
    AgentDefinition def;
    def.guidelines = {guideline("g", "c", "a")};
    const Session session = session_with({CustomerMessage{"hi"}});
    for (int n : {1, 3, 5}) {
        ScriptedBackend b({seq(message_completion(revision_chain(n)))});
        const auto r = generate_message(session, def, {}, {}, ReasoningMode::Arq, b);
        if (r.text != "draft " + std::to_string(n)) return fail(std::to_string(n) + " revisions returned '" + r.text + "'");
    }
    const auto parsed = parse_completion(builtin_blueprint(Module::MessageGenerator, ReasoningMode::Arq),
                                         message_completion(revision_chain(6)).dump());
    bool length = false;
    for (const auto& v : parsed.violations) length = length || (v.kind == Violation::Kind::Length && v.path == "revisions");
    if (!length) return fail("6 revisions not rejected with a length violation");

    // An unfinished fifth revision does not lead to a request for a sixth.
    auto five = revision_chain(5);
    five[4]["further_revisions_required"] = true;
    ScriptedBackend b({seq(message_completion(five)), seq(message_completion(revision_chain(5)))});
    MessageGeneratorConfig cfg;
    cfg.reprompt_unfinished = true;
    const auto r = generate_message(session, def, {}, {}, ReasoningMode::Arq, b, cfg);
    if (b.call_count() != 1 || r.trace.revisions.size() != 5) return fail("engine asked for more than 5 revisions");
    const std::string instruction = render_schema_instruction(builtin_blueprint(Module::MessageGenerator, ReasoningMode::Arq));
    if (instruction.find("5") == std::string::npos) return fail("output format does not state the revision bound");
    return pass("1/3/5 revisions return the last, 6 rejected (length), no request beyond 5");
}

Outcome sample_corpus_gate() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto scenarios = load_scenarios(source_path("corpus/sample"));
    EvalOptions opts;
    opts.modes = {ReasoningMode::Arq, ReasoningMode::Cot, ReasoningMode::Direct};
    opts.repetitions = 5;
    const auto report = aggregate_report(run_evaluation(scenarios, scripted_provider(), opts));
    const double secs = seconds_since(t0);
    std::string d = std::to_string(scenarios.size()) + " scenarios x 3 modes x 5 reps:";
    for (const auto& m : report.modes) d += " " + to_string(m.mode) + "=" + fmt(m.total_rate) + "%";
    d += ", " + fmt(secs) + "s";
    std::string failures;
    for (const auto& m : report.modes) {
        for (const auto& s : m.scenarios) {
            if (!s.passed) failures += " " + to_string(m.mode) + "/" + s.scenario_id;
        }
    }
    if (!failures.empty()) d += "; failed:" + failures;
    return report.all_passed() && report.modes.size() == 3 && secs < 60.0 ? pass(d) : fail(d);
}

Outcome live_smoke() {
    const char* key = std::getenv("ARQ_ENGINE_API_KEY");
    if (!key || !*key) return skip("ARQ_ENGINE_API_KEY not set");
    const auto all = load_scenarios(source_path("corpus/sample"));
    std::string log;
    for (const auto& s : all) {
        if (s.kind != ScenarioKind::Comprehensive) continue;
        if (s.id.find("geolocation") == std::string::npos && s.id.find("hallucination") == std::string::npos) continue;
        const auto r = run_scenario(s, ReasoningMode::Arq, 1, shared_provider(std::make_shared<OpenAiBackend>(openai_config_from_env())));
        if (r[0].reason.rfind("turn-failed", 0) == 0 || r[0].reason.rfind("error", 0) == 0) return fail(s.id + ": " + r[0].reason);
        log += " " + s.id + (r[0].passed ? "=pass" : "=fail") + (r[0].hallucination_risk ? "(hallucination-risk)" : "");
    }
    return pass("turns completed;" + log);
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"activation-truth-table", activation_truth_table},
        {"comparison-table-aggregation", comparison_table_totals},
        {"token-usage-accounting", token_accounting},
        {"blueprint-property-suite", blueprint_properties},
        {"end-to-end-determinism", end_to_end_determinism},
        {"tool-gating", tool_gating},
        {"revision-bounds", revision_bounds},
        {"sample-corpus-gate", sample_corpus_gate},
        {"live-smoke", live_smoke},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = fail(std::string("exception: ") + e.what());
        }
        const char* tag = o.status == Outcome::Status::Pass ? "PASS" : o.status == Outcome::Status::Fail ? "FAIL" : "SKIP";
        if (o.status == Outcome::Status::Fail) ++failed;
        std::cout << tag << " " << name << ": " << o.detail << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
