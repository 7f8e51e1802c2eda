#pragma once

#include <chrono>
#include <string>

#include "dana/lm.hpp"

namespace dana {

struct HttpBackendConfig {
    std::string endpoint;  // e.g. "https://api.example.com/v1"
    std::string model;
    std::string api_key;   // sent as "Authorization: Bearer <key>" when set
    std::chrono::milliseconds timeout{30000};

    // Reads DANA_LM_ENDPOINT / DANA_LM_MODEL / DANA_LM_API_KEY.
    static HttpBackendConfig from_env();
};

// OpenAI-compatible chat-completions client: POST {endpoint}/chat/completions.
// finish_reason "stop" maps to complete, "length" to truncated; anything else
// is a ProtocolError. Connection failures and 408/429/5xx raise TransportError
// (retryable); other HTTP errors and malformed bodies raise ProtocolError.
class HttpBackend : public LmBackend {
public:
    explicit HttpBackend(HttpBackendConfig config);

    LmResponse complete(const LmRequest& request) override;
    std::string id() const override;

private:
    HttpBackendConfig config_;
    std::string base_;         // scheme://host[:port]
    std::string path_prefix_;  // e.g. "/v1"
};

}  // namespace dana
