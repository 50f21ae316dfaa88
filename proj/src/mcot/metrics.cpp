#include "mcot/metrics.hpp"

#include "mcot/errors.hpp"

#include <algorithm>
#include <map>

namespace mcot {

ConsistencyResult logical_consistency(const ChainOfThought& chain, const JudgeConfig& cfg) {
    if (chain.n() < 1) {
        throw ContractViolation("logical_consistency: chain must have n >= 1");
    }
    if (chain.n() == 1) {
        return {0, Rational(1)};
    }
    int raw = 0;
    for (std::size_t i = 0; i + 1 < chain.steps.size(); ++i) {
        if (judge_connection(chain.steps[i], chain.steps[i + 1], cfg).connected) ++raw;
    }
    return {raw, Rational(raw, chain.n() - 1)};
}

Rational coherence(const ChainOfThought& initial, const ChainOfThought& refined,
                   const JudgeConfig& cfg) {
    if (initial.steps.empty() || refined.steps.empty()) {
        throw ContractViolation("coherence: both chains must be non-empty");
    }
    std::size_t paired = std::min(initial.steps.size(), refined.steps.size());
    int consistent = 0;
    for (std::size_t i = 0; i < paired; ++i) {
        if (judge_refinement_consistency(initial.steps[i], refined.steps[i], cfg).connected) {
            ++consistent;
        }
    }
    return Rational(consistent, initial.n());
}

Rational reasoning_improvement(const Rational& c_cot, const Rational& c_refined) {
    if (c_cot.is_zero()) {
        throw DivisionByZero("reasoning improvement undefined at C_CoT = 0");
    }
    return (c_refined - c_cot) / c_cot * Rational(100);
}

Rational error_correction_rate(int e_initial, int e_corrected) {
    if (e_initial < 0 || e_corrected < 0 || e_corrected > e_initial) {
        throw ContractViolation("error counts must satisfy 0 <= e_corrected <= e_initial");
    }
    if (e_initial == 0) return Rational(100);
    return Rational(e_corrected, e_initial) * Rational(100);
}

std::vector<Rational> round_deltas(const std::vector<Rational>& consistencies) {
    if (consistencies.empty()) {
        throw ContractViolation("round_deltas: need at least one consistency value");
    }
    std::vector<Rational> deltas;
    deltas.reserve(consistencies.size() - 1);
    for (std::size_t k = 1; k < consistencies.size(); ++k) {
        deltas.push_back(consistencies[k] - consistencies[k - 1]);
    }
    return deltas;
}

Rational total_improvement(const std::vector<Rational>& deltas) {
    Rational total;
    for (const Rational& d : deltas) total = total + d;
    return total;
}

ErrorCounts count_errors(const MultiplexTrace& trace) {
    ErrorCounts out;
    const ChainOfThought& first = trace.rounds.front().chain;
    const ChainOfThought& last = trace.rounds.back().chain;

    if (has_error_labels(first)) {
        // Labeled path: an initial error counts as corrected when the same
        // index is no longer labeled an error in the final chain.
        std::map<int, bool> final_error;
        for (const ReasoningStep& step : last.steps) {
            final_error[step.index] = step.gold_is_error.value_or(false);
        }
        for (const ReasoningStep& step : first.steps) {
            if (!step.gold_is_error.value_or(false)) continue;
            ++out.initial;
            auto it = final_error.find(step.index);
            bool still_wrong = it != final_error.end() && it->second;
            if (trace.rounds.size() > 1 && !still_wrong) ++out.corrected;
        }
        return out;
    }

    if (trace.rounds.front().critique.has_value()) {
        std::map<int, const ReasoningStep*> final_by_index;
        for (const ReasoningStep& step : last.steps) final_by_index[step.index] = &step;
        std::map<int, const ReasoningStep*> first_by_index;
        for (const ReasoningStep& step : first.steps) first_by_index[step.index] = &step;

        for (const CritiqueItem& item : trace.rounds.front().critique->items) {
            if (item.verdict != Verdict::flag_error) continue;
            ++out.initial;
            if (trace.rounds.size() == 1) continue;
            auto before = first_by_index.find(item.target_index);
            auto after = final_by_index.find(item.target_index);
            if (before == first_by_index.end()) continue;
            if (after == final_by_index.end() || after->second->text != before->second->text) {
                ++out.corrected;
            }
        }
    }
    return out;
}

MetricsReport score_trace(const MultiplexTrace& trace, const JudgeConfig& cfg) {
    if (trace.rounds.empty()) {
        throw ContractViolation("score_trace: trace has no rounds");
    }
    MetricsReport report;

    std::vector<Rational> consistencies;
    consistencies.reserve(trace.rounds.size());
    for (const RoundRecord& round : trace.rounds) {
        consistencies.push_back(logical_consistency(round.chain, cfg).normalized);
    }
    ConsistencyResult final_c = logical_consistency(trace.rounds.back().chain, cfg);
    report.c_raw = final_c.raw;
    report.c_norm = final_c.normalized;

    report.coherence = trace.rounds.size() == 1
                           ? Rational(1)
                           : coherence(trace.rounds.front().chain,
                                       trace.rounds.back().chain, cfg);

    ErrorCounts errors = count_errors(trace);
    report.e_initial = errors.initial;
    report.e_corrected = errors.corrected;
    report.e_corr_rate = error_correction_rate(errors.initial, errors.corrected);

    report.deltas = round_deltas(consistencies);
    report.total_improvement = total_improvement(report.deltas);
    if (!consistencies.front().is_zero()) {
        report.improvement_pct = reasoning_improvement(consistencies.front(),
                                                       consistencies.back());
    }
    return report;
}

} // namespace mcot
