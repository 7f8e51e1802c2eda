#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dana/errors.hpp"

namespace dana {

enum class Role { system, user, assistant };

std::string role_name(Role role);

struct LmMessage {
    Role role = Role::user;
    std::string content;
};

struct LmRequest {
    std::vector<LmMessage> messages;
    double temperature = 0.0;          // deterministic decoding is the default
    int max_output_units = 1024;
    std::optional<long long> seed = 0; // fixed seed unless explicitly unset

    // All message contents joined with newlines; what scripted rules match on.
    std::string concatenated_content() const;
};

// Throws ValidationError unless: messages non-empty with non-empty contents,
// first role system or user, temperature >= 0, max_output_units >= 1.
void validate_request(const LmRequest& request);

enum class FinishReason { complete, truncated };

struct LmResponse {
    std::string text;
    FinishReason finish_reason = FinishReason::complete;
    std::string backend_id;
};

// One completion interface in front of every probabilistic step. Instances
// must tolerate concurrent in-flight complete() calls.
class LmBackend {
public:
    virtual ~LmBackend() = default;
    virtual LmResponse complete(const LmRequest& request) = 0;
    virtual std::string id() const = 0;
};

struct ScriptRule {
    std::vector<std::string> match_substrings; // all must occur in the request
    std::string response;
    int priority = 0;                          // lower wins
};

// Deterministic rule-table backend: the response is a pure function of the
// request content and the script. Immutable after construction, safely
// shareable across threads.
class ScriptedBackend : public LmBackend {
public:
    explicit ScriptedBackend(std::vector<ScriptRule> rules);

    static ScriptedBackend from_file(const std::filesystem::path& path);
    static ScriptedBackend from_json_text(const std::string& json_text,
                                          const std::string& origin = "<script>");

    LmResponse complete(const LmRequest& request) override;
    std::string id() const override { return "scripted"; }

    const std::vector<ScriptRule>& rules() const { return rules_; }

private:
    std::vector<ScriptRule> rules_; // sorted by (priority, definition order)
};

using SleepFn = std::function<void(std::chrono::milliseconds)>;

SleepFn real_sleep();

// Retries only TransportError, with exponential backoff (base 1s, factor 2,
// full jitter). Everything else propagates immediately. On exhaustion throws
// TransportError carrying the attempt count.
LmResponse with_retries(LmBackend& backend, const LmRequest& request, int max_attempts,
                        const SleepFn& sleep = real_sleep());

// Pass-through decorator that counts completed calls; used for the
// call-accounting bookkeeping of program search and by tests.
class CountingBackend : public LmBackend {
public:
    explicit CountingBackend(LmBackend& inner) : inner_(inner) {}

    LmResponse complete(const LmRequest& request) override {
        calls_.fetch_add(1, std::memory_order_relaxed);
        return inner_.complete(request);
    }
    std::string id() const override { return inner_.id(); }
    int calls() const { return calls_.load(std::memory_order_relaxed); }

private:
    LmBackend& inner_;
    std::atomic<int> calls_{0};
};

// Decorator form of with_retries, for callers that just want a backend.
class RetryBackend : public LmBackend {
public:
    RetryBackend(LmBackend& inner, int max_attempts, SleepFn sleep = real_sleep())
        : inner_(inner), max_attempts_(max_attempts), sleep_(std::move(sleep)) {}

    LmResponse complete(const LmRequest& request) override {
        return with_retries(inner_, request, max_attempts_, sleep_);
    }
    std::string id() const override { return inner_.id(); }

private:
    LmBackend& inner_;
    int max_attempts_;
    SleepFn sleep_;
};

}  // namespace dana
