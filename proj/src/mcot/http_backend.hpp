#pragma once

#include "mcot/backend.hpp"

#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <string>

namespace mcot {

struct HttpBackendConfig {
    std::string base_url;  // falls back to MCOT_API_BASE
    std::string api_key;   // falls back to MCOT_API_KEY
    std::string model = "default";
    int max_retries = 2;   // retryable failures only
    int in_flight_limit = 4;
    std::chrono::milliseconds initial_backoff{200};

    static HttpBackendConfig from_environment();
};

// Minimal chat-completions client: POST {base}/v1/chat/completions, bearer
// auth, bounded retries with exponential backoff, bounded in-flight requests.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig cfg);

    BackendResponse complete(const BackendRequest& request) override;
    std::string provider_tag() const override;
    int in_flight_limit() const override { return cfg_.in_flight_limit; }

private:
    class Slot;

    BackendResponse attempt(const BackendRequest& request);

    HttpBackendConfig cfg_;
    std::string host_;       // scheme://authority
    std::string path_base_;  // optional path prefix from base_url

    std::mutex mutex_;
    std::condition_variable slot_free_;
    int in_flight_ = 0;
};

} // namespace mcot
