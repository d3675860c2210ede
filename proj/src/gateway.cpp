#include "arq/gateway.hpp"

#include <chrono>
#include <cstdlib>
#include <sstream>
#include <thread>

namespace arq {

void check_request(const CompletionRequest& req) {
    if (!(req.temperature >= 0.0 && req.temperature <= 2.0)) {
        throw Error("completion request temperature " + std::to_string(req.temperature) + " outside [0, 2]");
    }
    if (req.max_output_tokens < 1) throw Error("completion request max_output_tokens must be positive");
}

Usage& Usage::operator+=(const Usage& other) {
    input_tokens += other.input_tokens;
    output_tokens += other.output_tokens;
    retries_used += other.retries_used;
    return *this;
}

Json to_json(const Usage& usage) {
    return {{"input_tokens", usage.input_tokens},
            {"output_tokens", usage.output_tokens},
            {"retries_used", usage.retries_used}};
}

Usage usage_from_json(const Json& j) {
    Usage u;
    u.input_tokens = j.value("input_tokens", std::int64_t{0});
    u.output_tokens = j.value("output_tokens", std::int64_t{0});
    u.retries_used = j.value("retries_used", std::int64_t{0});
    return u;
}

std::int64_t whitespace_token_count(const std::string& text) {
    std::istringstream in(text);
    std::int64_t n = 0;
    std::string word;
    while (in >> word) ++n;
    return n;
}

// ---------------------------------------------------------------------------
// Scripted backend
// ---------------------------------------------------------------------------

ScriptEntry script_entry_from_json(const Json& j) {
    if (!j.is_object()) throw Error("script entry: expected object");
    ScriptEntry e;
    if (j.contains("match")) {
        const Json& m = j.at("match");
        if (m.is_string() && m.get<std::string>() == "sequence") {
            e.match = ScriptEntry::Match::Sequence;
        } else if (m.is_object() && m.contains("contains") && m.at("contains").is_string()) {
            e.match = ScriptEntry::Match::Substring;
            e.substring = m.at("contains").get<std::string>();
        } else {
            throw Error("script entry: 'match' must be \"sequence\" or {\"contains\": text}");
        }
    }
    if (!j.contains("response")) throw Error("script entry: missing 'response'");
    const Json& r = j.at("response");
    e.response_text = r.is_string() ? r.get<std::string>() : r.dump(2);
    if (j.contains("output_tokens")) e.output_tokens = j.at("output_tokens").get<std::int64_t>();
    if (j.contains("max_uses")) e.max_uses = j.at("max_uses").get<int>();
    return e;
}

std::vector<ScriptEntry> script_from_json(const Json& j) {
    if (!j.is_array()) throw Error("script: expected array of entries");
    std::vector<ScriptEntry> out;
    for (const auto& e : j) out.push_back(script_entry_from_json(e));
    return out;
}

ScriptedBackend::ScriptedBackend(std::vector<ScriptEntry> entries)
    : entries_(std::move(entries)), uses_(entries_.size(), 0) {}

CompletionResponse ScriptedBackend::complete(const CompletionRequest& req) {
    check_request(req);
    std::lock_guard lock(mutex_);
    requests_.push_back(req);

    const ScriptEntry* chosen = nullptr;
    for (std::size_t i = 0; i < entries_.size() && !chosen; ++i) {
        const ScriptEntry& e = entries_[i];
        if (e.match != ScriptEntry::Match::Substring) continue;
        if (e.max_uses && uses_[i] >= *e.max_uses) continue;
        if (req.prompt.find(e.substring) == std::string::npos) continue;
        ++uses_[i];
        chosen = &e;
    }
    while (!chosen && next_sequence_ < entries_.size()) {
        const std::size_t i = next_sequence_++;
        if (entries_[i].match == ScriptEntry::Match::Sequence) {
            ++uses_[i];
            chosen = &entries_[i];
        }
    }
    if (!chosen) {
        throw ScriptExhaustedError("script exhausted after " + std::to_string(requests_.size() - 1) + " calls");
    }

    CompletionResponse out;
    out.text = chosen->response_text;
    out.usage.input_tokens = whitespace_token_count(req.prompt);
    out.usage.output_tokens = chosen->output_tokens.value_or(whitespace_token_count(chosen->response_text));
    return out;
}

std::vector<CompletionRequest> ScriptedBackend::requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
}

std::size_t ScriptedBackend::call_count() const {
    std::lock_guard lock(mutex_);
    return requests_.size();
}

// ---------------------------------------------------------------------------
// Settings
// ---------------------------------------------------------------------------

ModuleSettings default_settings(Module module) {
    switch (module) {
    case Module::Proposer: return {"gpt-4o-2024-08-06", 0.15, 4096};
    case Module::ToolCaller: return {"gpt-4o-2024-11-20", 0.05, 4096};
    case Module::MessageGenerator: return {"gpt-4o-2024-08-06", 0.1, 4096};
    case Module::Judge: return {"gpt-4o-2024-08-06", 0.0, 4096};
    }
    return {};
}

CompletionRequest make_request(const ModuleSettings& settings, std::string prompt) {
    CompletionRequest req;
    req.prompt = std::move(prompt);
    req.model = settings.model;
    req.temperature = settings.temperature;
    req.max_output_tokens = settings.max_output_tokens;
    return req;
}

// ---------------------------------------------------------------------------
// Structured completion with repair
// ---------------------------------------------------------------------------

StructuredCompletionError::StructuredCompletionError(std::vector<Violation> violations, std::string raw_text,
                                                     Usage usage)
    : Error("structured completion failed: " +
            (violations.empty() ? std::string("unknown violation") : violations.front().message) +
            (violations.size() > 1 ? " (+" + std::to_string(violations.size() - 1) + " more)" : std::string())),
      violations_(std::move(violations)),
      raw_text_(std::move(raw_text)),
      usage_(usage) {}

std::string repair_message(const std::vector<Violation>& violations, const std::string& previous_output) {
    std::string out = "\n\nYOUR PREVIOUS RESPONSE WAS REJECTED\n-----------------\nPrevious response:\n";
    out += previous_output;
    out += "\n\nIt violated the required format:\n";
    for (const auto& v : violations) out += "- " + v.message + "\n";
    out += "Respond again with the complete JSON object in the required format, correcting these problems.\n";
    return out;
}

StructuredResult complete_structured(CompletionBackend& backend, const ReasoningBlueprint& bp,
                                     const CompletionRequest& req, int max_repairs, const ExtraCheck& extra_check) {
    if (max_repairs < 0) throw Error("max_repairs must be non-negative");
    Usage total;
    CompletionRequest attempt = req;
    for (int i = 0;; ++i) {
        CompletionResponse resp = backend.complete(attempt);
        total += resp.usage;
        ParseResult parsed = parse_completion(bp, resp.text);
        if (parsed.ok() && extra_check) parsed.violations = extra_check(*parsed.completion);
        if (parsed.ok()) {
            total.retries_used = i;
            return {std::move(*parsed.completion), total};
        }
        if (i >= max_repairs) {
            total.retries_used = i;
            throw StructuredCompletionError(std::move(parsed.violations), resp.text, total);
        }
        attempt.prompt = req.prompt + repair_message(parsed.violations, resp.text);
    }
}

// ---------------------------------------------------------------------------
// Usage summaries
// ---------------------------------------------------------------------------

std::int64_t UsageSummary::rounded_mean() const {
    if (samples <= 0) return 0;
    // floor((2 * total + n) / (2n)) is the half-up rounding of total / n for non-negative totals.
    return (2 * total_output_tokens + samples) / (2 * samples);
}

double UsageSummary::mean() const {
    return samples > 0 ? static_cast<double>(total_output_tokens) / static_cast<double>(samples) : 0.0;
}

UsageSummary summarize_usage(const std::vector<Usage>& usages, const std::string& group_key) {
    if (usages.empty()) throw EmptyGroupError("no usage samples for group " + group_key);
    UsageSummary s;
    s.group = group_key;
    for (const auto& u : usages) {
        s.total_output_tokens += u.output_tokens;
        ++s.samples;
    }
    return s;
}

}  // namespace arq
