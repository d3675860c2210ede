#include "arq/gateway.hpp"
#include "http_url.hpp"

#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <thread>

namespace arq {

OpenAiConfig openai_config_from_env() {
    OpenAiConfig config;
    if (const char* key = std::getenv("ARQ_ENGINE_API_KEY")) config.api_key = key;
    if (const char* url = std::getenv("ARQ_ENGINE_BASE_URL")) config.base_url = url;
    return config;
}

OpenAiBackend::OpenAiBackend(OpenAiConfig config) : config_(std::move(config)) {}

Json OpenAiBackend::build_request_body(const CompletionRequest& req) {
    return {{"model", req.model},
            {"messages", Json::array({{{"role", "user"}, {"content", req.prompt}}})},
            {"temperature", req.temperature},
            {"max_tokens", req.max_output_tokens}};
}

CompletionResponse OpenAiBackend::parse_response_body(const std::string& body) {
    Json j = Json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ProviderError("provider returned a non-JSON body");
    if (j.contains("error") && !j.at("error").is_null()) {
        const Json& err = j.at("error");
        std::string msg = err.is_object() && err.contains("message") && err.at("message").is_string()
                              ? err.at("message").get<std::string>()
                              : err.dump();
        throw ProviderError("provider error: " + msg);
    }
    if (!j.contains("choices") || !j.at("choices").is_array() || j.at("choices").empty()) {
        throw ProviderError("provider response has no choices");
    }
    const Json& message = j.at("choices")[0].value("message", Json::object());
    if (!message.contains("content") || !message.at("content").is_string()) {
        throw ProviderError("provider response has no message content");
    }
    CompletionResponse out;
    out.text = message.at("content").get<std::string>();
    if (j.contains("usage") && j.at("usage").is_object()) {
        const Json& u = j.at("usage");
        out.usage.input_tokens = u.value("prompt_tokens", std::int64_t{0});
        out.usage.output_tokens = u.value("completion_tokens", std::int64_t{0});
    }
    return out;
}

CompletionResponse OpenAiBackend::complete(const CompletionRequest& req) {
    check_request(req);
    const detail::ParsedUrl url = detail::parse_url(config_.base_url);
    const std::string path = url.path_prefix + config_.path;
    const std::string body = build_request_body(req).dump();

    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    std::string last_error;
    int delay_ms = config_.backoff_base_ms;
    for (int attempt = 0; attempt <= config_.transport_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
            delay_ms *= 2;
        }
        httplib::Client client(url.scheme_host_port);
        const auto timeout = std::chrono::milliseconds(config_.timeout_ms);
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        client.set_write_timeout(timeout);

        auto res = client.Post(path, headers, body, "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status >= 400) {
            try {
                parse_response_body(res->body);
            } catch (const ProviderError& e) {
                throw ProviderError(std::string(e.what()) + " (HTTP " + std::to_string(res->status) + ")");
            }
            throw ProviderError("provider returned HTTP " + std::to_string(res->status));
        }
        return parse_response_body(res->body);
    }
    throw TransportError("chat completion transport failed after " + std::to_string(config_.transport_retries + 1) +
                         " attempts: " + last_error);
}

}  // namespace arq
