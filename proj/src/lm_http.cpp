#include "dana/lm_http.hpp"

#include <cstdlib>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "dana/logging.hpp"

namespace dana {

using nlohmann::json;

namespace {

std::string env_or_empty(const char* name) {
    const char* value = std::getenv(name);
    return value == nullptr ? std::string() : std::string(value);
}

// "https://host:port/v1" -> ("https://host:port", "/v1")
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("endpoint must include a scheme: " + endpoint);
    }
    auto path_start = endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {endpoint, ""};
    std::string base = endpoint.substr(0, path_start);
    std::string prefix = endpoint.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {base, prefix};
}

bool retryable_status(int status) {
    return status == 408 || status == 429 || status >= 500;
}

}  // namespace

HttpBackendConfig HttpBackendConfig::from_env() {
    HttpBackendConfig config;
    config.endpoint = env_or_empty("DANA_LM_ENDPOINT");
    config.model = env_or_empty("DANA_LM_MODEL");
    config.api_key = env_or_empty("DANA_LM_API_KEY");
    return config;
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty()) throw ConfigError("http backend requires an endpoint");
    if (config_.model.empty()) throw ConfigError("http backend requires a model name");
    std::tie(base_, path_prefix_) = split_endpoint(config_.endpoint);
}

std::string HttpBackend::id() const { return "http:" + config_.model; }

LmResponse HttpBackend::complete(const LmRequest& request) {
    validate_request(request);

    json body;
    body["model"] = config_.model;
    json messages = json::array();
    for (const auto& message : request.messages) {
        messages.push_back({{"role", role_name(message.role)}, {"content", message.content}});
    }
    body["messages"] = std::move(messages);
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_output_units;
    if (request.seed) body["seed"] = *request.seed;

    const std::string payload = body.dump();
    const std::string path = path_prefix_ + "/chat/completions";
    if (log::enabled(log::Level::debug)) {
        log::debug("POST ", base_, path, " ", log::redact_credentials(payload));
    }

    // One client per call keeps concurrent in-flight requests independent.
    httplib::Client client(base_);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    httplib::Headers headers;
    if (!config_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + config_.api_key);
    }

    auto result = client.Post(path, headers, payload, "application/json");
    if (!result) {
        throw TransportError("request to " + base_ + path +
                             " failed: " + httplib::to_string(result.error()));
    }
    if (result->status != 200) {
        std::string detail = "HTTP " + std::to_string(result->status) + " from " + base_ + path;
        if (retryable_status(result->status)) throw TransportError(detail);
        throw ProtocolError(detail + ": " + result->body.substr(0, 200));
    }

    json reply;
    try {
        reply = json::parse(result->body);
    } catch (const json::exception& ex) {
        throw ProtocolError(std::string("malformed completion body: ") + ex.what());
    }
    if (log::enabled(log::Level::debug)) {
        log::debug("completion reply ", log::redact_credentials(reply.dump()));
    }

    if (!reply.contains("choices") || !reply["choices"].is_array() || reply["choices"].empty()) {
        throw ProtocolError("completion reply has no choices");
    }
    const json& choice = reply["choices"][0];
    if (!choice.contains("message") || !choice["message"].contains("content") ||
        !choice["message"]["content"].is_string()) {
        throw ProtocolError("completion reply missing choices[0].message.content");
    }

    LmResponse response;
    response.text = choice["message"]["content"].get<std::string>();
    response.backend_id = id();

    const std::string finish =
        choice.contains("finish_reason") && choice["finish_reason"].is_string()
            ? choice["finish_reason"].get<std::string>()
            : "";
    if (finish == "stop") {
        response.finish_reason = FinishReason::complete;
    } else if (finish == "length") {
        response.finish_reason = FinishReason::truncated;
    } else {
        throw ProtocolError("unexpected finish_reason: '" + finish + "'");
    }
    if (response.text.empty() && response.finish_reason == FinishReason::complete) {
        throw ProtocolError("empty completion text with finish_reason=stop");
    }
    return response;
}

}  // namespace dana
