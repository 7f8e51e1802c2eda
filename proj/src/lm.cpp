#include "dana/lm.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "dana/logging.hpp"

namespace dana {

using nlohmann::json;

std::string role_name(Role role) {
    switch (role) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

std::string LmRequest::concatenated_content() const {
    std::string out;
    for (const auto& message : messages) {
        if (!out.empty()) out.push_back('\n');
        out += message.content;
    }
    return out;
}

void validate_request(const LmRequest& request) {
    if (request.messages.empty()) throw ValidationError("request has no messages");
    for (const auto& message : request.messages) {
        if (message.content.empty()) throw ValidationError("message content is empty");
    }
    Role first = request.messages.front().role;
    if (first != Role::system && first != Role::user) {
        throw ValidationError("first message must have role system or user");
    }
    if (request.temperature < 0.0) throw ValidationError("temperature must be >= 0");
    if (request.max_output_units < 1) throw ValidationError("max_output_units must be >= 1");
}

ScriptedBackend::ScriptedBackend(std::vector<ScriptRule> rules) : rules_(std::move(rules)) {
    for (const auto& rule : rules_) {
        if (rule.match_substrings.empty()) {
            throw ValidationError("script rule has no match substrings");
        }
    }
    std::vector<int> priorities;
    priorities.reserve(rules_.size());
    for (const auto& rule : rules_) priorities.push_back(rule.priority);
    std::sort(priorities.begin(), priorities.end());
    if (std::adjacent_find(priorities.begin(), priorities.end()) != priorities.end()) {
        throw ValidationError("script rule priorities must be unique");
    }
    // Lowest priority wins; stable keeps definition order for hypothetical ties.
    std::stable_sort(rules_.begin(), rules_.end(),
                     [](const ScriptRule& a, const ScriptRule& b) { return a.priority < b.priority; });
}

ScriptedBackend ScriptedBackend::from_json_text(const std::string& json_text,
                                                const std::string& origin) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& ex) {
        throw ParseError(origin + ": " + ex.what());
    }
    if (!doc.is_array()) throw ParseError(origin + ": script must be a JSON array");
    std::vector<ScriptRule> rules;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const json& record = doc[i];
        std::string locus = origin + ": rule " + std::to_string(i);
        if (!record.is_object()) throw ParseError(locus + ": not an object");
        for (const auto& item : record.items()) {
            if (item.key() != "match" && item.key() != "response" && item.key() != "priority") {
                throw ParseError(locus + ": unknown field '" + item.key() + "'");
            }
        }
        if (!record.contains("match") || !record["match"].is_array()) {
            throw ParseError(locus + ": 'match' must be an array of strings");
        }
        ScriptRule rule;
        for (const auto& m : record["match"]) {
            if (!m.is_string()) throw ParseError(locus + ": 'match' must be an array of strings");
            rule.match_substrings.push_back(m.get<std::string>());
        }
        if (!record.contains("response") || !record["response"].is_string()) {
            throw ParseError(locus + ": 'response' must be a string");
        }
        rule.response = record["response"].get<std::string>();
        if (!record.contains("priority") || !record["priority"].is_number_integer()) {
            throw ParseError(locus + ": 'priority' must be an integer");
        }
        rule.priority = record["priority"].get<int>();
        rules.push_back(std::move(rule));
    }
    return ScriptedBackend(std::move(rules));
}

ScriptedBackend ScriptedBackend::from_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open script file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_json_text(buffer.str(), path.string());
}

LmResponse ScriptedBackend::complete(const LmRequest& request) {
    validate_request(request);
    const std::string content = request.concatenated_content();
    for (const auto& rule : rules_) {
        bool all_found = true;
        for (const auto& needle : rule.match_substrings) {
            if (content.find(needle) == std::string::npos) {
                all_found = false;
                break;
            }
        }
        if (all_found) {
            log::debug("scripted backend matched priority ", rule.priority);
            return LmResponse{rule.response, FinishReason::complete, id()};
        }
    }
    std::string snippet = content.substr(0, 160);
    throw NoMatchingRuleError("no script rule matches request content: \"" + snippet + "\"...");
}

SleepFn real_sleep() {
    return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

LmResponse with_retries(LmBackend& backend, const LmRequest& request, int max_attempts,
                        const SleepFn& sleep) {
    if (max_attempts < 1) throw ValidationError("max_attempts must be >= 1");
    for (int attempt = 1;; ++attempt) {
        try {
            return backend.complete(request);
        } catch (const TransportError& ex) {
            if (attempt >= max_attempts) {
                throw TransportError(std::string(ex.what()) + " (after " +
                                         std::to_string(attempt) + " attempts)",
                                     attempt);
            }
            // Full jitter over [0, 1s * 2^(attempt-1)].
            const double cap_ms = 1000.0 * static_cast<double>(1u << std::min(attempt - 1, 20));
            thread_local std::mt19937_64 rng{std::random_device{}()};
            std::uniform_real_distribution<double> dist(0.0, cap_ms);
            auto delay = std::chrono::milliseconds(static_cast<long>(dist(rng)));
            log::warn("transport failure (attempt ", attempt, "/", max_attempts, "), retrying in ",
                      delay.count(), "ms: ", ex.what());
            sleep(delay);
        }
    }
}

}  // namespace dana
