#include "mcot/trace_io.hpp"

#include "mcot/errors.hpp"

namespace mcot {

namespace {

const Json& require_field(const Json& j, const char* name, const char* context) {
    auto it = j.find(name);
    if (it == j.end()) {
        throw ParseFailure(std::string(context) + ": missing field \"" + name + "\"");
    }
    return *it;
}

std::string require_string(const Json& j, const char* name, const char* context) {
    const Json& f = require_field(j, name, context);
    if (!f.is_string()) {
        throw ParseFailure(std::string(context) + ": field \"" + name + "\" must be a string");
    }
    return f.get<std::string>();
}

std::int64_t require_int(const Json& j, const char* name, const char* context) {
    const Json& f = require_field(j, name, context);
    if (!f.is_number_integer()) {
        throw ParseFailure(std::string(context) + ": field \"" + name + "\" must be an integer");
    }
    return f.get<std::int64_t>();
}

} // namespace

Json rational_to_json(const Rational& r) {
    Json j = Json::object();
    j["num"] = r.num();
    j["den"] = r.den();
    return j;
}

Rational rational_from_json(const Json& j) {
    if (!j.is_object()) throw ParseFailure("rational: expected {\"num\", \"den\"} object");
    return Rational(require_int(j, "num", "rational"), require_int(j, "den", "rational"));
}

Json chain_to_json(const ChainOfThought& chain) {
    Json j = Json::object();
    Json steps = Json::array();
    for (const ReasoningStep& step : chain.steps) {
        Json s = Json::object();
        s["index"] = step.index;
        s["text"] = step.text;
        s["kind"] = to_string(step.kind);
        if (step.gold_is_error.has_value()) {
            s["gold_is_error"] = *step.gold_is_error;
        }
        steps.push_back(std::move(s));
    }
    j["steps"] = std::move(steps);
    j["final_answer"] = chain.final_answer;
    j["round"] = chain.round;
    return j;
}

ChainOfThought chain_from_json(const Json& j) {
    if (!j.is_object()) throw ParseFailure("chain: expected object");
    ChainOfThought chain;
    const Json& steps = require_field(j, "steps", "chain");
    if (!steps.is_array()) throw ParseFailure("chain: \"steps\" must be an array");
    for (const Json& s : steps) {
        ReasoningStep step;
        step.index = static_cast<int>(require_int(s, "index", "step"));
        step.text = require_string(s, "text", "step");
        step.kind = step_kind_from_string(require_string(s, "kind", "step"));
        if (auto it = s.find("gold_is_error"); it != s.end() && !it->is_null()) {
            if (!it->is_boolean()) throw ParseFailure("step: \"gold_is_error\" must be a boolean");
            step.gold_is_error = it->get<bool>();
        }
        chain.steps.push_back(std::move(step));
    }
    chain.final_answer = require_string(j, "final_answer", "chain");
    chain.round = static_cast<int>(require_int(j, "round", "chain"));
    return chain;
}

Json critique_to_json(const Critique& critique) {
    Json j = Json::object();
    Json items = Json::array();
    for (const CritiqueItem& item : critique.items) {
        Json it = Json::object();
        it["target_index"] = item.target_index;
        it["verdict"] = to_string(item.verdict);
        it["rationale"] = item.rationale;
        items.push_back(std::move(it));
    }
    j["items"] = std::move(items);
    return j;
}

Critique critique_from_json(const Json& j) {
    if (!j.is_object()) throw ParseFailure("critique: expected object");
    Critique critique;
    const Json& items = require_field(j, "items", "critique");
    if (!items.is_array()) throw ParseFailure("critique: \"items\" must be an array");
    for (const Json& it : items) {
        CritiqueItem item;
        item.target_index = static_cast<int>(require_int(it, "target_index", "critique item"));
        item.verdict = verdict_from_string(require_string(it, "verdict", "critique item"));
        item.rationale = require_string(it, "rationale", "critique item");
        critique.items.push_back(std::move(item));
    }
    return critique;
}

Json task_to_json(const Task& task) {
    Json j = Json::object();
    j["id"] = task.id;
    j["category"] = to_string(task.category);
    j["question"] = task.question;
    if (task.reference_answer) j["reference_answer"] = *task.reference_answer;
    if (task.gold_chain) j["gold_chain"] = chain_to_json(*task.gold_chain);
    return j;
}

Task task_from_json(const Json& j) {
    if (!j.is_object()) throw ParseFailure("task: expected object");
    Task task;
    task.id = require_string(j, "id", "task");
    task.category = category_from_string(require_string(j, "category", "task"));
    task.question = require_string(j, "question", "task");
    if (task.id.empty()) throw InvariantViolation("task.id", "must be non-empty");
    if (task.question.empty()) throw InvariantViolation("task.question", "must be non-empty");
    if (auto it = j.find("reference_answer"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw ParseFailure("task: \"reference_answer\" must be a string");
        task.reference_answer = it->get<std::string>();
    }
    if (auto it = j.find("gold_chain"); it != j.end() && !it->is_null()) {
        task.gold_chain = chain_from_json(*it);
    }
    return task;
}

std::string serialize_trace(const MultiplexTrace& trace) {
    std::vector<std::string> violations = validate_trace(trace);
    if (!violations.empty()) {
        throw InvariantViolation(violations.front(), "refusing to serialize invalid trace");
    }
    Json j = Json::object();
    j["task_id"] = trace.task_id;
    Json rounds = Json::array();
    for (const RoundRecord& rec : trace.rounds) {
        Json r = Json::object();
        r["chain"] = chain_to_json(rec.chain);
        if (rec.critique) {
            r["critique"] = critique_to_json(*rec.critique);
        }
        r["consistency"] = rational_to_json(rec.consistency);
        r["delta"] = rational_to_json(rec.delta);
        rounds.push_back(std::move(r));
    }
    j["rounds"] = std::move(rounds);
    j["final_answer"] = trace.final_answer;
    j["config_snapshot"] = trace.config_snapshot;
    return j.dump(2) + "\n";
}

MultiplexTrace deserialize_trace(const std::string& document) {
    Json j;
    try {
        j = Json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseFailure(std::string("malformed trace document: ") + e.what(), e.byte);
    }
    if (!j.is_object()) throw ParseFailure("trace: expected top-level object");

    MultiplexTrace trace;
    trace.task_id = require_string(j, "task_id", "trace");
    const Json& rounds = require_field(j, "rounds", "trace");
    if (!rounds.is_array()) throw ParseFailure("trace: \"rounds\" must be an array");
    for (const Json& r : rounds) {
        RoundRecord rec;
        rec.chain = chain_from_json(require_field(r, "chain", "round"));
        if (auto it = r.find("critique"); it != r.end() && !it->is_null()) {
            rec.critique = critique_from_json(*it);
        }
        rec.consistency = rational_from_json(require_field(r, "consistency", "round"));
        rec.delta = rational_from_json(require_field(r, "delta", "round"));
        trace.rounds.push_back(std::move(rec));
    }
    trace.final_answer = require_string(j, "final_answer", "trace");
    if (auto it = j.find("config_snapshot"); it != j.end()) {
        trace.config_snapshot = *it;
    }

    std::vector<std::string> violations = validate_trace(trace);
    if (!violations.empty()) {
        throw InvariantViolation(violations.front(), "trace document violates invariants");
    }
    return trace;
}

} // namespace mcot
