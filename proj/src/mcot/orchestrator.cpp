#include "mcot/orchestrator.hpp"

#include "mcot/errors.hpp"
#include "mcot/metrics.hpp"
#include "mcot/trace_io.hpp"

#include <algorithm>

namespace mcot {

std::string to_string(PromptMode m) {
    switch (m) {
        case PromptMode::combined: return "combined";
        case PromptMode::two_call: return "two_call";
    }
    throw ContractViolation("unknown PromptMode");
}

PromptMode prompt_mode_from_string(const std::string& s) {
    if (s == "combined") return PromptMode::combined;
    if (s == "two_call") return PromptMode::two_call;
    throw ParseFailure("unknown prompt mode: " + s);
}

void validate_run_config(const RunConfig& cfg) {
    if (cfg.max_rounds < 1) {
        throw ContractViolation("max_rounds must be >= 1");
    }
    if (cfg.epsilon.is_negative()) {
        throw ContractViolation("epsilon must be >= 0");
    }
    if (cfg.judge.lexical_threshold.is_negative() ||
        Rational(1) < cfg.judge.lexical_threshold) {
        throw ContractViolation("lexical_threshold must be in [0,1]");
    }
    if (cfg.max_output_tokens <= 0 || cfg.timeout.count() <= 0) {
        throw ContractViolation("max_output_tokens and timeout must be positive");
    }
}

PromptText build_combined_prompt(const Task& task, const PromptTemplates& templates) {
    if (task.question.empty()) {
        throw ContractViolation("task question must be non-empty");
    }
    return {instantiate_template(templates.combined, {{"question", task.question}}),
            PromptPhase::combined};
}

PromptText build_initial_prompt(const Task& task, const PromptTemplates& templates) {
    if (task.question.empty()) {
        throw ContractViolation("task question must be non-empty");
    }
    return {instantiate_template(templates.initial, {{"question", task.question}}),
            PromptPhase::initial};
}

PromptText build_review_prompt(const Task& task, const ChainOfThought& prior,
                               const PromptTemplates& templates) {
    if (prior.steps.empty()) {
        throw ContractViolation("review prompt requires a non-empty prior chain");
    }
    return {instantiate_template(templates.review, {{"question", task.question},
                                                    {"chain", render_chain(prior)}}),
            PromptPhase::review};
}

bool should_stop(const std::vector<Rational>& deltas, const RunConfig& cfg) {
    if (static_cast<int>(deltas.size()) + 1 >= cfg.max_rounds) return true;
    return !deltas.empty() && deltas.back() < cfg.epsilon;
}

void label_errors_by_marker(ChainOfThought& chain, const std::string& marker) {
    for (ReasoningStep& step : chain.steps) {
        step.gold_is_error = step.text.find(marker) != std::string::npos;
    }
}

void label_errors_from_gold(ChainOfThought& chain, const ChainOfThought& gold) {
    for (ReasoningStep& step : chain.steps) {
        if (step.gold_is_error.has_value()) continue;
        for (const ReasoningStep& gold_step : gold.steps) {
            if (gold_step.index == step.index) {
                step.gold_is_error = gold_step.gold_is_error;
                break;
            }
        }
    }
}

namespace {

Json config_snapshot(const Task& task, Backend& backend, const RunConfig& cfg) {
    Json snapshot;
    snapshot["task_id"] = task.id;
    snapshot["category"] = to_string(task.category);
    snapshot["backend"] = backend.provider_tag();
    snapshot["prompt_mode"] = to_string(cfg.prompt_mode);
    snapshot["max_rounds"] = cfg.max_rounds;
    snapshot["epsilon"] = rational_to_json(cfg.epsilon);
    snapshot["judge"] = Json{{"strategy", to_string(cfg.judge.strategy)},
                             {"lexical_threshold", rational_to_json(cfg.judge.lexical_threshold)}};
    if (cfg.seed.has_value()) snapshot["seed"] = *cfg.seed;
    if (cfg.error_marker.has_value()) snapshot["error_marker"] = *cfg.error_marker;
    return snapshot;
}

BackendRequest make_request(PromptText prompt, const RunConfig& cfg) {
    BackendRequest request;
    request.prompt = std::move(prompt);
    request.temperature = cfg.temperature;
    request.max_output_tokens = cfg.max_output_tokens;
    request.timeout = cfg.timeout;
    return request;
}

void apply_labels(ChainOfThought& chain, const Task& task, const RunConfig& cfg) {
    if (cfg.error_marker.has_value()) {
        label_errors_by_marker(chain, *cfg.error_marker);
    }
    if (task.gold_chain.has_value()) {
        label_errors_from_gold(chain, *task.gold_chain);
    }
}

void append_round(MultiplexTrace& trace, ChainOfThought chain, int round,
                  std::vector<Rational>& consistencies, const RunConfig& cfg) {
    chain.round = round;
    RoundRecord record;
    record.chain = std::move(chain);
    record.consistency = logical_consistency(record.chain, cfg.judge).normalized;
    record.delta = consistencies.empty() ? Rational(0)
                                         : record.consistency - consistencies.back();
    consistencies.push_back(record.consistency);
    trace.rounds.push_back(std::move(record));
}

} // namespace

RunOutcome run_multiplex(const Task& task, Backend& backend, const RunConfig& cfg) {
    validate_run_config(cfg);
    if (task.question.empty()) {
        throw ContractViolation("task question must be non-empty");
    }

    RunOutcome outcome;
    MultiplexTrace trace;
    trace.task_id = task.id;
    trace.config_snapshot = config_snapshot(task, backend, cfg);

    std::vector<Rational> consistencies;
    std::optional<ChainOfThought> combined_refined;
    std::optional<Critique> combined_critique;

    auto collect = [&](const std::vector<std::string>& warnings) {
        outcome.warnings.insert(outcome.warnings.end(), warnings.begin(), warnings.end());
    };

    // round 0
    try {
        if (cfg.prompt_mode == PromptMode::combined) {
            BackendResponse response =
                backend.complete(make_request(build_combined_prompt(task, cfg.templates), cfg));
            try {
                MultiplexParse parsed = parse_multiplex_response(response.text, cfg.parser);
                collect(parsed.initial.warnings);
                collect(parsed.warnings);
                collect(parsed.refined.warnings);
                ChainOfThought initial = std::move(parsed.initial.chain);
                apply_labels(initial, task, cfg);
                append_round(trace, std::move(initial), 0, consistencies, cfg);
                trace.rounds.back().critique = std::move(parsed.critique);
                combined_refined = std::move(parsed.refined.chain);
                apply_labels(*combined_refined, task, cfg);
            } catch (const PhaseMissing& missing) {
                outcome.warnings.push_back(
                    "combined response lacked a review phase; falling back to two-call mode");
                collect(missing.initial().warnings);
                ChainOfThought initial = missing.initial().chain;
                apply_labels(initial, task, cfg);
                append_round(trace, std::move(initial), 0, consistencies, cfg);
            }
        } else {
            BackendResponse response =
                backend.complete(make_request(build_initial_prompt(task, cfg.templates), cfg));
            ParseReport parsed = parse_chain(response.text, cfg.parser);
            collect(parsed.warnings);
            ChainOfThought initial = std::move(parsed.chain);
            apply_labels(initial, task, cfg);
            append_round(trace, std::move(initial), 0, consistencies, cfg);
        }
    } catch (const Error& e) {
        outcome.error = std::string("round 0: ") + e.what();
        return outcome;
    }

    // review rounds
    while (!should_stop(round_deltas(consistencies), cfg)) {
        int round = static_cast<int>(trace.rounds.size());
        if (round == 1 && combined_refined.has_value()) {
            append_round(trace, std::move(*combined_refined), 1, consistencies, cfg);
            combined_refined.reset();
            continue;
        }
        const ChainOfThought& prior = trace.rounds.back().chain;
        try {
            BackendResponse response = backend.complete(
                make_request(build_review_prompt(task, prior, cfg.templates), cfg));
            ReviewParse parsed = parse_review_response(response.text, prior, cfg.parser);
            collect(parsed.warnings);
            collect(parsed.refined.warnings);
            trace.rounds.back().critique = std::move(parsed.critique);
            ChainOfThought refined = std::move(parsed.refined.chain);
            apply_labels(refined, task, cfg);
            append_round(trace, std::move(refined), round, consistencies, cfg);
        } catch (const Error& e) {
            outcome.error = "round " + std::to_string(round) + ": " + e.what();
            break;
        }
    }

    trace.final_answer = trace.rounds.back().chain.final_answer;
    std::vector<std::string> violations = validate_trace(trace);
    if (!violations.empty()) {
        throw InvariantViolation(violations.front(), "run produced an invalid trace");
    }
    outcome.trace = std::move(trace);
    return outcome;
}

} // namespace mcot
