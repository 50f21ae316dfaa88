#pragma once

#include "mcot/rational.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace mcot {

using Json = nlohmann::ordered_json;

enum class StepKind { premise, inference, conclusion, critique_note };

enum class Verdict { confirm, flag_error, suggest_revision };

enum class TaskCategory { arithmetic, commonsense, ethical, logical_puzzle, other };

const char* to_string(StepKind kind);
const char* to_string(Verdict verdict);
const char* to_string(TaskCategory category);
StepKind step_kind_from_string(const std::string& s);
Verdict verdict_from_string(const std::string& s);
TaskCategory category_from_string(const std::string& s);

/// One statement s_i in a chain. Indexes are 1-based.
struct ReasoningStep {
    int index = 0;
    std::string text;
    StepKind kind = StepKind::inference;
    std::optional<bool> gold_is_error;

    bool operator==(const ReasoningStep&) const = default;
};

/// Ordered steps s_1..s_n plus a final answer; one per reasoning round.
struct ChainOfThought {
    std::vector<ReasoningStep> steps;
    std::string final_answer;
    int round = 0;

    int n() const { return static_cast<int>(steps.size()); }
    bool operator==(const ChainOfThought&) const = default;
};

struct CritiqueItem {
    int target_index = 0;
    Verdict verdict = Verdict::confirm;
    std::string rationale;

    bool operator==(const CritiqueItem&) const = default;
};

/// Per-step verdicts produced by a review phase.
struct Critique {
    std::vector<CritiqueItem> items;

    bool operator==(const Critique&) const = default;
};

struct Task {
    std::string id;
    TaskCategory category = TaskCategory::other;
    std::string question;
    std::optional<std::string> reference_answer;
    std::optional<ChainOfThought> gold_chain;

    bool operator==(const Task&) const = default;
};

/// One round of a run: the chain it produced, the critique that reviewed it
/// (absent for the final round), and the consistency score bookkeeping.
struct RoundRecord {
    ChainOfThought chain;
    std::optional<Critique> critique;
    Rational consistency;
    Rational delta;

    bool operator==(const RoundRecord&) const = default;
};

/// Full record of one task run.
struct MultiplexTrace {
    std::string task_id;
    std::vector<RoundRecord> rounds;
    std::string final_answer;
    Json config_snapshot = Json::object();

    bool operator==(const MultiplexTrace&) const = default;
};

/// Returns one description per broken chain invariant; empty means valid.
/// An empty final_answer is not reported here: it is legal on truncated
/// chains and the truncation flag lives in the parser's warnings.
std::vector<std::string> validate_chain(const ChainOfThought& chain);

/// Invariant check across a whole trace, including the exact delta identity
/// rounds[k].delta = rounds[k].consistency - rounds[k-1].consistency.
std::vector<std::string> validate_trace(const MultiplexTrace& trace);

} // namespace mcot
