#pragma once

#include "mcot/backend.hpp"
#include "mcot/chain.hpp"

#include <cstdint>
#include <map>
#include <mutex>
#include <string>

namespace mcot {

// Marker appended to a wrong step's text, before the final period. Chosen to
// avoid every critique cue so refined chains never read as critique notes.
inline constexpr const char* kSyntheticErrorMarker = "[[wrong]]";

struct SyntheticConfig {
    double error_rate = 0.3;       // p: probability a generated step is wrong
    double correction_prob = 0.5;  // q: probability a wrong step is fixed per review
    int steps_per_chain = 10;      // content steps; a conclusion step is appended
    std::uint64_t rng_seed = 0;
};

void validate_synthetic_config(const SyntheticConfig& cfg);

// "problem <hex8>", a stable tag derived from the question; every generated
// step embeds it so reviews can recover the task identity from bare text.
std::string synthetic_task_tag(const std::string& question);

// A numbered chain whose steps are independently wrong with probability p;
// wrong steps carry the marker. Deterministic in (rng_seed, question).
std::string synthetic_generate(const Task& task, const SyntheticConfig& cfg);

// Critique notes plus a full renumbered refined chain in which each marked
// step is independently corrected with probability q. Deterministic in
// (rng_seed, embedded tag, round_index).
std::string synthetic_review(const std::string& chain_text, const SyntheticConfig& cfg,
                             int round_index);

int count_markers(const std::string& text);

class SyntheticBackend : public Backend {
public:
    explicit SyntheticBackend(SyntheticConfig cfg);

    // initial prompts -> a fresh chain; review prompts -> critique + refined
    // chain; combined prompts -> both phases under the standard headers.
    BackendResponse complete(const BackendRequest& request) override;
    std::string provider_tag() const override { return "synthetic"; }
    int in_flight_limit() const override { return 64; }

private:
    int next_review_round(const std::string& tag);

    SyntheticConfig cfg_;
    std::mutex mutex_;
    std::map<std::string, int> review_rounds_;
};

} // namespace mcot
