// arq-eval: runs scenario corpora and reports success rates and token usage.

#include "arq/eval.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"ARQ evaluation harness"};
    app.require_subcommand(1);

    std::string scenarios;
    std::string mode = "arq";
    int reps = 5;
    std::string backend = "scripted";
    std::string report_path;
    std::string rule = "majority";
    int parallelism = 4;
    std::string engine_config;

    auto* run = app.add_subcommand("run", "Run scenarios");
    run->add_option("--scenarios", scenarios, "Scenario file or directory")->required()->check(CLI::ExistingPath);
    run->add_option("--mode", mode, "Reasoning mode")->check(CLI::IsMember({"arq", "cot", "direct", "all"}));
    run->add_option("--reps", reps, "Repetitions per scenario")->check(CLI::PositiveNumber);
    run->add_option("--backend", backend, "Completion backend")->check(CLI::IsMember({"scripted", "live"}));
    run->add_option("--report", report_path, "Write the JSON report here");
    run->add_option("--pass-rule", rule, "How repetitions fold into a scenario verdict")
        ->check(CLI::IsMember({"majority", "all", "any"}));
    run->add_option("--parallelism", parallelism, "Scenarios run at once")->check(CLI::PositiveNumber);
    run->add_option("--engine-config", engine_config, "Engine settings (JSON)")->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        arq::EvalOptions options;
        options.repetitions = reps;
        options.parallelism = parallelism;
        if (!engine_config.empty()) options.config = arq::engine_config_from_json(arq::load_json_file(engine_config));
        if (mode == "all") {
            options.modes = {arq::ReasoningMode::Arq, arq::ReasoningMode::Cot, arq::ReasoningMode::Direct};
        } else {
            options.modes = {arq::reasoning_mode_from(mode)};
        }

        arq::BackendProvider provider;
        if (backend == "live") {
            const auto cfg = arq::openai_config_from_env();
            if (cfg.api_key.empty()) {
                std::cerr << "error: --backend live needs ARQ_ENGINE_API_KEY\n";
                return 2;
            }
            provider = arq::shared_provider(std::make_shared<arq::OpenAiBackend>(cfg));
        } else {
            provider = arq::scripted_provider();
        }

        const auto loaded = arq::load_scenarios(scenarios);
        if (loaded.empty()) {
            std::cerr << "error: no scenarios in " << scenarios << "\n";
            return 2;
        }
        const auto results = arq::run_evaluation(loaded, provider, options);
        const auto report = arq::aggregate_report(results, arq::pass_rule_from(rule));
        std::cout << arq::render_report_table(report);
        if (!report_path.empty()) {
            arq::Json j = arq::to_json(report);
            arq::Json runs = arq::Json::array();
            for (const auto& r : results) runs.push_back(arq::to_json(r));
            j["runs"] = runs;
            arq::write_file_atomic(report_path, j.dump(2) + "\n");
        }
        return report.all_passed() ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
