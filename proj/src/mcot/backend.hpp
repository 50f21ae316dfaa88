#pragma once

#include "mcot/rational.hpp"

#include <chrono>
#include <string>

namespace mcot {

enum class PromptPhase { initial, review, combined };

std::string to_string(PromptPhase p);

struct PromptText {
    std::string text;
    PromptPhase phase = PromptPhase::combined;
};

struct BackendRequest {
    PromptText prompt;
    Rational temperature{0};
    int max_output_tokens = 1024;
    std::chrono::milliseconds timeout{30000};
};

struct BackendResponse {
    std::string text;
    std::chrono::milliseconds latency{0};
    std::string provider_tag;
};

// timeout > 0, max_output_tokens > 0, prompt text non-empty
void validate_request(const BackendRequest& request);

class Backend {
public:
    virtual ~Backend() = default;

    // Safe for concurrent callers up to in_flight_limit().
    virtual BackendResponse complete(const BackendRequest& request) = 0;
    virtual std::string provider_tag() const = 0;
    virtual int in_flight_limit() const { return 8; }
};

} // namespace mcot
