#include "mcot/backend.hpp"

#include "mcot/errors.hpp"

namespace mcot {

std::string to_string(PromptPhase p) {
    switch (p) {
        case PromptPhase::initial: return "initial";
        case PromptPhase::review: return "review";
        case PromptPhase::combined: return "combined";
    }
    throw ContractViolation("unknown PromptPhase");
}

void validate_request(const BackendRequest& request) {
    if (request.prompt.text.empty()) {
        throw ContractViolation("backend request: prompt text must be non-empty");
    }
    if (request.max_output_tokens <= 0) {
        throw ContractViolation("backend request: max_output_tokens must be positive");
    }
    if (request.timeout.count() <= 0) {
        throw ContractViolation("backend request: timeout must be positive");
    }
}

} // namespace mcot
