#pragma once

#include "mcot/chain.hpp"
#include "mcot/judge.hpp"
#include "mcot/rational.hpp"

#include <optional>
#include <vector>

namespace mcot {

struct ConsistencyResult {
    int raw = 0;            // count of connected consecutive pairs
    Rational normalized;    // raw/(n-1); 1 when n = 1
};

// C over the n-1 consecutive step pairs.
ConsistencyResult logical_consistency(const ChainOfThought& chain, const JudgeConfig& cfg);

// H: consistent index-wise pairs over min(n_initial, n_refined), divided by
// n_initial, so dropped steps count against coherence.
Rational coherence(const ChainOfThought& initial, const ChainOfThought& refined,
                   const JudgeConfig& cfg);

// (c_refined - c_cot)/c_cot * 100; DivisionByZero when c_cot = 0.
Rational reasoning_improvement(const Rational& c_cot, const Rational& c_refined);

// e_corrected/e_initial * 100; 100 when both are zero.
Rational error_correction_rate(int e_initial, int e_corrected);

// deltas[k-1] = C^(k) - C^(k-1)
std::vector<Rational> round_deltas(const std::vector<Rational>& consistencies);

Rational total_improvement(const std::vector<Rational>& deltas);

struct MetricsReport {
    int c_raw = 0;                  // final refined chain
    Rational c_norm;                // final refined chain
    Rational coherence;             // initial vs final chain; 1 for single-round traces
    int e_initial = 0;
    int e_corrected = 0;
    Rational e_corr_rate;
    std::optional<Rational> improvement_pct;  // undefined when C^(0) = 0
    std::vector<Rational> deltas;
    Rational total_improvement;
};

// Recomputes every metric for a trace with the given judge. Error counts use
// gold_is_error labels when both end chains carry them; otherwise the round-0
// critique's flag_error targets, counting a flagged step as corrected when its
// text changed (or it vanished) by the final round.
MetricsReport score_trace(const MultiplexTrace& trace, const JudgeConfig& cfg);

struct ErrorCounts {
    int initial = 0;
    int corrected = 0;
};

ErrorCounts count_errors(const MultiplexTrace& trace);

} // namespace mcot
