#include "mcot/http_backend.hpp"

#include "mcot/errors.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <thread>

namespace mcot {

namespace {

std::string env_or_empty(const char* name) {
    const char* value = std::getenv(name);
    return value ? value : "";
}

} // namespace

HttpBackendConfig HttpBackendConfig::from_environment() {
    HttpBackendConfig cfg;
    cfg.base_url = env_or_empty("MCOT_API_BASE");
    cfg.api_key = env_or_empty("MCOT_API_KEY");
    return cfg;
}

HttpBackend::HttpBackend(HttpBackendConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.base_url.empty()) cfg_.base_url = env_or_empty("MCOT_API_BASE");
    if (cfg_.api_key.empty()) cfg_.api_key = env_or_empty("MCOT_API_KEY");
    if (cfg_.base_url.empty()) {
        throw ContractViolation("http backend: base URL missing (set MCOT_API_BASE)");
    }
    if (cfg_.in_flight_limit < 1) {
        throw ContractViolation("http backend: in_flight_limit must be positive");
    }

    // split "scheme://authority/prefix" into client target and path prefix
    std::string url = cfg_.base_url;
    while (!url.empty() && url.back() == '/') url.pop_back();
    std::size_t scheme = url.find("://");
    std::size_t path_start =
        scheme == std::string::npos ? url.find('/') : url.find('/', scheme + 3);
    if (path_start == std::string::npos) {
        host_ = url;
    } else {
        host_ = url.substr(0, path_start);
        path_base_ = url.substr(path_start);
    }
}

std::string HttpBackend::provider_tag() const {
    return "http:" + cfg_.model;
}

class HttpBackend::Slot {
public:
    Slot(HttpBackend& owner) : owner_(owner) {
        std::unique_lock<std::mutex> lock(owner_.mutex_);
        owner_.slot_free_.wait(lock, [&] { return owner_.in_flight_ < owner_.cfg_.in_flight_limit; });
        ++owner_.in_flight_;
    }
    ~Slot() {
        {
            std::lock_guard<std::mutex> lock(owner_.mutex_);
            --owner_.in_flight_;
        }
        owner_.slot_free_.notify_one();
    }

private:
    HttpBackend& owner_;
};

BackendResponse HttpBackend::attempt(const BackendRequest& request) {
    httplib::Client client(host_);
    auto timeout = request.timeout;
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout) +
                                  std::chrono::seconds(1));
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    httplib::Headers headers;
    if (!cfg_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + cfg_.api_key);
    }

    nlohmann::ordered_json body;
    body["model"] = cfg_.model;
    body["messages"] = nlohmann::json::array(
        {nlohmann::ordered_json{{"role", "user"}, {"content", request.prompt.text}}});
    body["temperature"] = request.temperature.to_double();
    body["max_tokens"] = request.max_output_tokens;

    auto started = std::chrono::steady_clock::now();
    httplib::Result result = client.Post(path_base_ + "/v1/chat/completions", headers,
                                         body.dump(), "application/json");
    auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - started);

    if (!result) {
        bool timed_out = result.error() == httplib::Error::ConnectionTimeout ||
                         result.error() == httplib::Error::Read ||
                         result.error() == httplib::Error::Write;
        throw BackendFailure(timed_out ? BackendFailure::Kind::timeout
                                       : BackendFailure::Kind::transport,
                             "http backend: " + httplib::to_string(result.error()), true);
    }
    if (result->status == 429 || result->status >= 500) {
        throw BackendFailure(BackendFailure::Kind::transport,
                             "http backend: status " + std::to_string(result->status), true);
    }
    if (result->status != 200) {
        throw BackendFailure(BackendFailure::Kind::refusal,
                             "http backend: status " + std::to_string(result->status), false);
    }

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(result->body);
    } catch (const nlohmann::json::parse_error& e) {
        throw BackendFailure(BackendFailure::Kind::transport,
                             std::string("http backend: malformed response body: ") + e.what(),
                             false);
    }
    if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty() ||
        !doc["choices"][0].contains("message") ||
        !doc["choices"][0]["message"].contains("content") ||
        !doc["choices"][0]["message"]["content"].is_string()) {
        throw BackendFailure(BackendFailure::Kind::transport,
                             "http backend: response lacks choices[0].message.content", false);
    }
    return {doc["choices"][0]["message"]["content"].get<std::string>(), latency,
            provider_tag()};
}

BackendResponse HttpBackend::complete(const BackendRequest& request) {
    validate_request(request);
    Slot slot(*this);

    std::chrono::milliseconds backoff = cfg_.initial_backoff;
    for (int tries = 0;; ++tries) {
        try {
            return attempt(request);
        } catch (const BackendFailure& failure) {
            if (!failure.retryable() || tries >= cfg_.max_retries) throw;
        }
        std::this_thread::sleep_for(backoff);
        backoff *= 2;
    }
}

} // namespace mcot
