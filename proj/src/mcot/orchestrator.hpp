#pragma once

#include "mcot/backend.hpp"
#include "mcot/chain.hpp"
#include "mcot/judge.hpp"
#include "mcot/parser.hpp"
#include "mcot/prompts.hpp"
#include "mcot/rational.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mcot {

enum class PromptMode { combined, two_call };

std::string to_string(PromptMode m);
PromptMode prompt_mode_from_string(const std::string& s);

struct RunConfig {
    int max_rounds = 2;          // K
    Rational epsilon;            // stop when delta_k < epsilon
    PromptMode prompt_mode = PromptMode::combined;
    JudgeConfig judge;
    std::optional<std::uint64_t> seed;

    // when set, parsed steps get gold_is_error = text contains the marker
    std::optional<std::string> error_marker;

    PromptTemplates templates = PromptTemplates::defaults();
    ParserConfig parser = ParserConfig::defaults();
    Rational temperature;
    int max_output_tokens = 4096;
    std::chrono::milliseconds timeout{30000};
};

void validate_run_config(const RunConfig& cfg);

PromptText build_combined_prompt(const Task& task, const PromptTemplates& templates);
PromptText build_initial_prompt(const Task& task, const PromptTemplates& templates);
PromptText build_review_prompt(const Task& task, const ChainOfThought& prior,
                               const PromptTemplates& templates);

// true iff the last delta fell below epsilon or the finished round count
// (deltas + 1) reached max_rounds; never true before round 1 completes.
bool should_stop(const std::vector<Rational>& deltas, const RunConfig& cfg);

// Sets gold_is_error on every step: true iff the text contains the marker.
void label_errors_by_marker(ChainOfThought& chain, const std::string& marker);

// Copies gold_is_error from gold steps onto same-index steps lacking a label.
void label_errors_from_gold(ChainOfThought& chain, const ChainOfThought& gold);

struct RunOutcome {
    std::optional<MultiplexTrace> trace;  // absent when round 0 never completed
    std::optional<std::string> error;     // set when the run aborted early
    std::vector<std::string> warnings;

    bool ok() const { return trace.has_value() && !error.has_value(); }
};

// Executes the protocol for one task: round 0 generation (one combined call
// or an initial call), then review/refine rounds until should_stop.
RunOutcome run_multiplex(const Task& task, Backend& backend, const RunConfig& cfg);

} // namespace mcot
