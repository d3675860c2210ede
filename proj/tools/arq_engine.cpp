// arq-engine: HTTP server and terminal chat for ARQ agents.

#include "arq/engine.hpp"
#include "arq/http_api.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <iostream>

namespace {

namespace fs = std::filesystem;

std::shared_ptr<arq::CompletionBackend> make_backend(const arq::Json& spec, const fs::path& base) {
    const std::string type = spec.value("type", std::string("openai"));
    if (type == "scripted") {
        const fs::path script = base / spec.at("script").get<std::string>();
        return std::make_shared<arq::ScriptedBackend>(arq::script_from_json(arq::load_json_file(script.string())));
    }
    if (type != "openai") throw arq::Error("backend.type must be openai or scripted");
    arq::OpenAiConfig cfg = arq::openai_config_from_env();
    if (spec.contains("base_url")) cfg.base_url = spec.at("base_url").get<std::string>();
    if (spec.contains("path")) cfg.path = spec.at("path").get<std::string>();
    if (spec.contains("timeout_ms")) cfg.timeout_ms = spec.at("timeout_ms").get<int>();
    if (cfg.api_key.empty()) std::cerr << "warning: ARQ_ENGINE_API_KEY is not set\n";
    return std::make_shared<arq::OpenAiBackend>(cfg);
}

std::unique_ptr<httplib::Server> g_server;

int serve(const std::string& config_path, const std::string& host, int port) {
    const arq::Json cfg = arq::load_json_file(config_path);
    const fs::path base = fs::path(config_path).parent_path();
    const arq::EngineConfig engine_cfg = arq::engine_config_from_json(cfg.value("engine", arq::Json::object()));

    std::shared_ptr<arq::SessionStore> store;
    if (cfg.contains("store_dir")) {
        store = std::make_shared<arq::FileStore>((base / cfg.at("store_dir").get<std::string>()).string());
    } else {
        store = std::make_shared<arq::MemoryStore>();
    }

    static std::optional<arq::PromptAssets> assets;
    if (cfg.contains("assets_dir")) assets = arq::PromptAssets::load((base / cfg.at("assets_dir").get<std::string>()).string());

    const auto backend = make_backend(cfg.value("backend", arq::Json::object()), base);
    arq::Engine engine(store, arq::EngineBackends::shared(backend), engine_cfg, assets ? &*assets : nullptr);

    if (cfg.contains("agents")) {
        for (auto it = cfg.at("agents").begin(); it != cfg.at("agents").end(); ++it) {
            const auto def = arq::load_agent_file((base / it.value().get<std::string>()).string());
            try {
                engine.create_agent(def, it.key());
            } catch (const arq::ConflictError&) {
                // Already persisted by an earlier run.
            }
            std::cerr << "agent " << it.key() << " loaded\n";
        }
    }

    arq::ApiOptions options;
    if (cfg.contains("static_dir")) options.static_dir = (base / cfg.at("static_dir").get<std::string>()).string();

    g_server = std::make_unique<httplib::Server>();
    arq::register_routes(*g_server, engine, options);
    std::signal(SIGINT, [](int) { g_server->stop(); });
    std::signal(SIGTERM, [](int) { g_server->stop(); });
    std::cerr << "listening on " << host << ":" << port << "\n";
    if (!g_server->listen(host, port)) {
        std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
        return 1;
    }
    return 0;
}

int chat(const std::string& agent_path, const std::string& mode_name, const std::string& script, bool show_trace) {
    const auto def = arq::load_agent_file(agent_path);
    arq::EngineConfig cfg;
    cfg.mode = arq::reasoning_mode_from(mode_name);
    arq::Json backend_spec = {{"type", "openai"}};
    if (!script.empty()) backend_spec = {{"type", "scripted"}, {"script", fs::absolute(script).string()}};
    arq::Engine engine(std::make_shared<arq::MemoryStore>(), arq::EngineBackends::shared(make_backend(backend_spec, "")),
                       cfg);
    const std::string agent_id = engine.create_agent(def, "chat");
    const std::string session_id = engine.create_session(agent_id);

    std::cout << "mode: " << arq::to_string(cfg.mode) << ". Type a message, or /quit.\n";
    std::string line;
    while (std::cout << "you> " << std::flush, std::getline(std::cin, line)) {
        if (line == "/quit" || line == "/exit") break;
        if (line.empty()) continue;
        try {
            const auto out = engine.process_turn(session_id, line);
            if (show_trace) std::cout << arq::to_json(out.trace).dump(2) << "\n";
            for (const auto& it : out.trace.iterations) {
                for (const auto& r : it.executed) {
                    std::cout << "  [tool " << r.tool << r.canonical_args << " -> " << arq::canonical_json(r.result)
                              << "]\n";
                }
            }
            if (out.trace.message_trace.hallucination_risk) std::cout << "  [warning: unsourced facts or services]\n";
            std::cout << "agent> " << out.agent_message.text << "\n";
        } catch (const arq::TurnFailedError& e) {
            std::cout << "  [turn failed: " << e.what() << "]\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ARQ conversational agent engine"};
    app.require_subcommand(1);

    std::string config_path;
    std::string host = "127.0.0.1";
    int port = 8080;
    auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP API");
    serve_cmd->add_option("--config", config_path, "Server configuration (JSON)")->required()->check(CLI::ExistingFile);
    serve_cmd->add_option("--port", port, "Port to listen on")->check(CLI::Range(1, 65535));
    serve_cmd->add_option("--host", host, "Address to bind");

    std::string agent_path;
    std::string mode = "arq";
    std::string script;
    bool show_trace = false;
    auto* chat_cmd = app.add_subcommand("chat", "Chat with an agent in the terminal");
    chat_cmd->add_option("--agent", agent_path, "Agent definition (JSON)")->required()->check(CLI::ExistingFile);
    chat_cmd->add_option("--mode", mode, "Reasoning mode")->check(CLI::IsMember({"arq", "cot", "direct"}));
    chat_cmd->add_option("--script", script, "Scripted completions instead of a live endpoint")
        ->check(CLI::ExistingFile);
    chat_cmd->add_flag("--trace", show_trace, "Print the full turn trace");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*serve_cmd) return serve(config_path, host, port);
        return chat(agent_path, mode, script, show_trace);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
