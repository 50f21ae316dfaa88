#include "mcot/chain.hpp"

#include "mcot/errors.hpp"

#include <set>
#include <string>

namespace mcot {

const char* to_string(StepKind kind) {
    switch (kind) {
        case StepKind::premise: return "premise";
        case StepKind::inference: return "inference";
        case StepKind::conclusion: return "conclusion";
        case StepKind::critique_note: return "critique_note";
    }
    return "inference";
}

const char* to_string(Verdict verdict) {
    switch (verdict) {
        case Verdict::confirm: return "confirm";
        case Verdict::flag_error: return "flag_error";
        case Verdict::suggest_revision: return "suggest_revision";
    }
    return "confirm";
}

const char* to_string(TaskCategory category) {
    switch (category) {
        case TaskCategory::arithmetic: return "arithmetic";
        case TaskCategory::commonsense: return "commonsense";
        case TaskCategory::ethical: return "ethical";
        case TaskCategory::logical_puzzle: return "logical_puzzle";
        case TaskCategory::other: return "other";
    }
    return "other";
}

StepKind step_kind_from_string(const std::string& s) {
    if (s == "premise") return StepKind::premise;
    if (s == "inference") return StepKind::inference;
    if (s == "conclusion") return StepKind::conclusion;
    if (s == "critique_note") return StepKind::critique_note;
    throw ParseFailure("unknown step kind: " + s);
}

Verdict verdict_from_string(const std::string& s) {
    if (s == "confirm") return Verdict::confirm;
    if (s == "flag_error") return Verdict::flag_error;
    if (s == "suggest_revision") return Verdict::suggest_revision;
    throw ParseFailure("unknown verdict: " + s);
}

TaskCategory category_from_string(const std::string& s) {
    if (s == "arithmetic") return TaskCategory::arithmetic;
    if (s == "commonsense") return TaskCategory::commonsense;
    if (s == "ethical") return TaskCategory::ethical;
    if (s == "logical_puzzle") return TaskCategory::logical_puzzle;
    if (s == "other") return TaskCategory::other;
    throw ParseFailure("unknown task category: " + s);
}

namespace {

bool trimmed_empty(const std::string& s) {
    for (char c : s) {
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

} // namespace

std::vector<std::string> validate_chain(const ChainOfThought& chain) {
    std::vector<std::string> violations;
    if (chain.steps.empty()) {
        violations.push_back("n must be ≥ 1");
        return violations;
    }
    if (chain.round < 0) {
        violations.push_back("round must be ≥ 0");
    }
    int expected = 1;
    for (const ReasoningStep& step : chain.steps) {
        if (step.index != expected) {
            if (expected == 1 && step.index != 1) {
                violations.push_back("indexes must start at 1");
            } else if (step.index == expected - 1) {
                violations.push_back("duplicate index " + std::to_string(step.index));
            } else {
                violations.push_back("index gap after " + std::to_string(expected - 1));
            }
            expected = step.index + 1;
        } else {
            ++expected;
        }
        if (step.index < 1) {
            violations.push_back("index must be ≥ 1");
        }
        if (trimmed_empty(step.text)) {
            violations.push_back("step " + std::to_string(step.index) + ": text empty");
        }
        if (step.kind == StepKind::critique_note) {
            violations.push_back("step " + std::to_string(step.index) +
                                 ": kind critique_note not allowed in a chain");
        }
    }
    return violations;
}

std::vector<std::string> validate_trace(const MultiplexTrace& trace) {
    std::vector<std::string> violations;
    if (trace.task_id.empty()) {
        violations.push_back("task_id empty");
    }
    if (trace.rounds.empty()) {
        violations.push_back("rounds must be non-empty");
        return violations;
    }
    for (std::size_t k = 0; k < trace.rounds.size(); ++k) {
        const RoundRecord& rec = trace.rounds[k];
        std::string where = "rounds[" + std::to_string(k) + "]";
        for (const std::string& v : validate_chain(rec.chain)) {
            violations.push_back(where + ".chain: " + v);
        }
        if (rec.chain.round != static_cast<int>(k)) {
            violations.push_back(where + ": rounds[k].chain.round = k violated (round is " +
                                 std::to_string(rec.chain.round) + ")");
        }
        if (k == 0) {
            if (!rec.delta.is_zero()) {
                violations.push_back(where + ": delta must be 0 for round 0");
            }
        } else {
            Rational expected = rec.consistency - trace.rounds[k - 1].consistency;
            if (rec.delta != expected) {
                violations.push_back(where + ": delta identity violated (delta != C^(k) - C^(k-1))");
            }
        }
        if (rec.critique) {
            std::set<int> seen;
            for (const CritiqueItem& item : rec.critique->items) {
                if (item.target_index < 1 || item.target_index > rec.chain.n()) {
                    violations.push_back(where + ".critique: target_index " +
                                         std::to_string(item.target_index) +
                                         " does not name a step of the critiqued chain");
                }
                if (!seen.insert(item.target_index).second) {
                    violations.push_back(where + ".critique: more than one item for target_index " +
                                         std::to_string(item.target_index));
                }
            }
        }
    }
    return violations;
}

} // namespace mcot
