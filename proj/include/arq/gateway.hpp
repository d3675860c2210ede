#pragma once

#include "arq/blueprint.hpp"
#include "arq/builtin_blueprints.hpp"
#include "arq/json.hpp"

#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace arq {

struct CompletionRequest {
    std::string prompt;
    std::string model;
    double temperature = 0.0;
    int max_output_tokens = 4096;
};

/// Throws Error if temperature is outside [0, 2] or max_output_tokens < 1.
void check_request(const CompletionRequest& req);

struct Usage {
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
    std::int64_t retries_used = 0;

    Usage& operator+=(const Usage& other);
    friend bool operator==(const Usage&, const Usage&) = default;
};

Json to_json(const Usage& usage);
Usage usage_from_json(const Json& j);

struct CompletionResponse {
    std::string text;
    Usage usage;
};

class TransportError : public Error {
public:
    using Error::Error;
};

class ProviderError : public Error {
public:
    using Error::Error;
};

class ScriptExhaustedError : public Error {
public:
    using Error::Error;
};

class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;
    virtual CompletionResponse complete(const CompletionRequest& req) = 0;
};

/// Number of whitespace-separated tokens.
std::int64_t whitespace_token_count(const std::string& text);

struct ScriptEntry {
    enum class Match { Sequence, Substring };
    Match match = Match::Sequence;
    std::string substring;
    std::string response_text;
    std::optional<std::int64_t> output_tokens;  // defaults to whitespace count of response_text
    std::optional<int> max_uses;                // substring entries only; unlimited when unset
};

ScriptEntry script_entry_from_json(const Json& j);
std::vector<ScriptEntry> script_from_json(const Json& j);

/**
 * Deterministic backend for tests and offline runs.
 *
 * Substring entries are tried first, in declaration order; the first whose
 * substring occurs in the prompt (and has uses left) answers. Otherwise the
 * next unconsumed sequence entry answers. When neither applies the call
 * fails with ScriptExhaustedError. Calls are serialized internally.
 */
class ScriptedBackend : public CompletionBackend {
public:
    explicit ScriptedBackend(std::vector<ScriptEntry> entries);

    CompletionResponse complete(const CompletionRequest& req) override;

    std::vector<CompletionRequest> requests() const;
    std::size_t call_count() const;

private:
    mutable std::mutex mutex_;
    std::vector<ScriptEntry> entries_;
    std::vector<int> uses_;
    std::size_t next_sequence_ = 0;
    std::vector<CompletionRequest> requests_;
};

struct OpenAiConfig {
    std::string base_url = "https://api.openai.com";
    std::string api_key;  // sent as a bearer token when non-empty
    std::string path = "/v1/chat/completions";
    int timeout_ms = 120000;
    int transport_retries = 3;
    int backoff_base_ms = 500;  // doubled after each failed attempt
};

/// Reads ARQ_ENGINE_API_KEY (and ARQ_ENGINE_BASE_URL when set).
OpenAiConfig openai_config_from_env();

/// OpenAI-compatible chat-completions backend.
class OpenAiBackend : public CompletionBackend {
public:
    explicit OpenAiBackend(OpenAiConfig config);
    CompletionResponse complete(const CompletionRequest& req) override;

    static Json build_request_body(const CompletionRequest& req);
    /// Parses a chat-completions response body; throws ProviderError for error payloads.
    static CompletionResponse parse_response_body(const std::string& body);

private:
    OpenAiConfig config_;
};

struct ModuleSettings {
    std::string model;
    double temperature = 0.0;
    int max_output_tokens = 4096;
};

ModuleSettings default_settings(Module module);

CompletionRequest make_request(const ModuleSettings& settings, std::string prompt);

struct StructuredResult {
    StructuredCompletion completion;
    Usage usage;
};

class StructuredCompletionError : public Error {
public:
    StructuredCompletionError(std::vector<Violation> violations, std::string raw_text, Usage usage);
    const std::vector<Violation>& violations() const { return violations_; }
    const std::string& raw_text() const { return raw_text_; }
    const Usage& usage() const { return usage_; }

private:
    std::vector<Violation> violations_;
    std::string raw_text_;
    Usage usage_;
};

/// Module-specific checks applied after schema validation (e.g. echoed ids).
using ExtraCheck = std::function<std::vector<Violation>(const StructuredCompletion&)>;

inline constexpr int kDefaultMaxRepairs = 2;

/**
 * Completes and validates against the blueprint. On violations the prompt
 * is extended with a repair message naming them and the call is retried,
 * at most max_repairs times. The returned usage sums every attempt.
 */
StructuredResult complete_structured(CompletionBackend& backend, const ReasoningBlueprint& bp,
                                     const CompletionRequest& req, int max_repairs,
                                     const ExtraCheck& extra_check = {});

std::string repair_message(const std::vector<Violation>& violations, const std::string& previous_output);

class EmptyGroupError : public Error {
public:
    using Error::Error;
};

struct UsageSummary {
    std::string group;
    std::int64_t samples = 0;
    std::int64_t total_output_tokens = 0;

    /// Mean rounded half-up to an integer, for display.
    std::int64_t rounded_mean() const;
    double mean() const;
};

/// Mean output tokens of one group. Throws EmptyGroupError on an empty list.
UsageSummary summarize_usage(const std::vector<Usage>& usages, const std::string& group_key);

}  // namespace arq
