#include "mcot/mcot.h"

#include "mcot/errors.hpp"
#include "mcot/http_backend.hpp"
#include "mcot/metrics.hpp"
#include "mcot/orchestrator.hpp"
#include "mcot/replay_backend.hpp"
#include "mcot/runner.hpp"
#include "mcot/synthetic.hpp"
#include "mcot/trace_io.hpp"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

using namespace mcot;

namespace {

thread_local std::string g_last_error;

char* copy_out(const std::string& text) {
    char* out = static_cast<char*>(std::malloc(text.size() + 1));
    if (out == nullptr) return nullptr;
    std::memcpy(out, text.data(), text.size() + 1);
    return out;
}

mcot_status fail(mcot_status status, const std::string& message) {
    g_last_error = message;
    return status;
}

mcot_status map_exception() {
    try {
        throw;
    } catch (const ParseFailure& e) {
        return fail(MCOT_ERR_PARSE, e.what());
    } catch (const InvariantViolation& e) {
        return fail(MCOT_ERR_VALIDATION, e.what());
    } catch (const MissingAnnotation& e) {
        return fail(MCOT_ERR_MISSING_ANNOTATION, e.what());
    } catch (const IoFailure& e) {
        return fail(MCOT_ERR_IO, e.what());
    } catch (const BackendFailure& e) {
        return fail(MCOT_ERR_BACKEND, e.what());
    } catch (const DivisionByZero& e) {
        return fail(MCOT_ERR_CONTRACT, e.what());
    } catch (const ContractViolation& e) {
        return fail(MCOT_ERR_CONTRACT, e.what());
    } catch (const Error& e) {
        return fail(MCOT_ERR_INTERNAL, e.what());
    } catch (const std::exception& e) {
        return fail(MCOT_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(MCOT_ERR_INTERNAL, "unknown error");
    }
}

Rational rational_from_flexible(const Json& j, const char* field) {
    if (j.is_string()) return Rational::from_decimal(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
    if (j.is_object() && j.contains("num") && j.contains("den")) {
        return rational_from_json(j);
    }
    throw ParseFailure(std::string(field) +
                       ": expected a decimal string, integer, or {num, den}");
}

double probability_from_flexible(const Json& j, const char* field) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return Rational::from_decimal(j.get<std::string>()).to_double();
    throw ParseFailure(std::string(field) + ": expected a number or decimal string");
}

JudgeConfig judge_from_json(const Json& j) {
    JudgeConfig judge;
    if (j.is_null()) return judge;
    if (!j.is_object()) {
        throw ParseFailure("judge config must be an object");
    }
    if (j.contains("strategy")) {
        judge.strategy = judge_strategy_from_string(j["strategy"].get<std::string>());
    }
    if (j.contains("lexical_threshold")) {
        judge.lexical_threshold = rational_from_flexible(j["lexical_threshold"],
                                                         "lexical_threshold");
    }
    if (j.contains("stopword_file")) {
        judge.stopwords = load_stopwords(j["stopword_file"].get<std::string>());
    }
    return judge;
}

} // namespace

struct mcot_engine {
    std::unique_ptr<Backend> backend;
    RunConfig run;
    std::string backend_kind;
};

extern "C" {

const char* mcot_version(void) {
    return "0.1.0";
}

const char* mcot_status_name(mcot_status status) {
    switch (status) {
        case MCOT_OK: return "MCOT_OK";
        case MCOT_ERR_INVALID_ARGUMENT: return "MCOT_ERR_INVALID_ARGUMENT";
        case MCOT_ERR_PARSE: return "MCOT_ERR_PARSE";
        case MCOT_ERR_VALIDATION: return "MCOT_ERR_VALIDATION";
        case MCOT_ERR_IO: return "MCOT_ERR_IO";
        case MCOT_ERR_BACKEND: return "MCOT_ERR_BACKEND";
        case MCOT_ERR_MISSING_ANNOTATION: return "MCOT_ERR_MISSING_ANNOTATION";
        case MCOT_ERR_CONTRACT: return "MCOT_ERR_CONTRACT";
        case MCOT_ERR_PARTIAL: return "MCOT_ERR_PARTIAL";
        case MCOT_ERR_INTERNAL: return "MCOT_ERR_INTERNAL";
    }
    return "MCOT_ERR_UNKNOWN";
}

const char* mcot_last_error(void) {
    return g_last_error.c_str();
}

void mcot_string_free(char* s) {
    std::free(s);
}

mcot_status mcot_engine_create(const char* config_json, mcot_engine** out_engine) {
    if (config_json == nullptr || out_engine == nullptr) {
        return fail(MCOT_ERR_INVALID_ARGUMENT, "config_json and out_engine are required");
    }
    *out_engine = nullptr;
    try {
        Json config = Json::parse(config_json);
        if (!config.is_object() || !config.contains("backend") ||
            !config["backend"].is_object() || !config["backend"].contains("kind")) {
            throw ParseFailure("engine config requires backend.kind");
        }
        auto engine = std::make_unique<mcot_engine>();

        const Json& backend = config["backend"];
        std::string kind = backend["kind"].get<std::string>();
        engine->backend_kind = kind;
        if (kind == "synthetic") {
            SyntheticConfig synth;
            if (backend.contains("error_rate")) {
                synth.error_rate = probability_from_flexible(backend["error_rate"],
                                                             "error_rate");
            }
            if (backend.contains("correction_prob")) {
                synth.correction_prob =
                    probability_from_flexible(backend["correction_prob"], "correction_prob");
            }
            if (backend.contains("steps_per_chain")) {
                synth.steps_per_chain = backend["steps_per_chain"].get<int>();
            }
            if (backend.contains("rng_seed")) {
                synth.rng_seed = backend["rng_seed"].get<std::uint64_t>();
            }
            engine->backend = std::make_unique<SyntheticBackend>(synth);
            // synthetic wrong steps are marker-labeled so judges can see them
            engine->run.error_marker = kSyntheticErrorMarker;
        } else if (kind == "replay") {
            if (!backend.contains("replay_file")) {
                throw ParseFailure("replay backend requires replay_file");
            }
            engine->backend = std::make_unique<ReplayBackend>(
                ReplayStore::load(backend["replay_file"].get<std::string>()));
        } else if (kind == "http") {
            HttpBackendConfig http = HttpBackendConfig::from_environment();
            if (backend.contains("base_url")) {
                http.base_url = backend["base_url"].get<std::string>();
            }
            if (backend.contains("api_key")) {
                http.api_key = backend["api_key"].get<std::string>();
            }
            if (backend.contains("model")) {
                http.model = backend["model"].get<std::string>();
            }
            engine->backend = std::make_unique<HttpBackend>(http);
        } else {
            throw ParseFailure("unknown backend kind: " + kind);
        }

        if (config.contains("run")) {
            const Json& run = config["run"];
            if (run.contains("max_rounds")) {
                engine->run.max_rounds = run["max_rounds"].get<int>();
            }
            if (run.contains("epsilon")) {
                engine->run.epsilon = rational_from_flexible(run["epsilon"], "epsilon");
            }
            if (run.contains("prompt_mode")) {
                engine->run.prompt_mode =
                    prompt_mode_from_string(run["prompt_mode"].get<std::string>());
            }
            if (run.contains("seed")) {
                engine->run.seed = run["seed"].get<std::uint64_t>();
            }
            if (run.contains("error_marker")) {
                engine->run.error_marker = run["error_marker"].get<std::string>();
            }
            if (run.contains("temperature")) {
                engine->run.temperature = rational_from_flexible(run["temperature"],
                                                                 "temperature");
            }
            if (run.contains("max_output_tokens")) {
                engine->run.max_output_tokens = run["max_output_tokens"].get<int>();
            }
            if (run.contains("timeout_ms")) {
                engine->run.timeout =
                    std::chrono::milliseconds(run["timeout_ms"].get<std::int64_t>());
            }
            if (run.contains("prompt_dir")) {
                std::string dir = run["prompt_dir"].get<std::string>();
                engine->run.templates.combined = load_template(dir + "/combined.txt");
                engine->run.templates.initial = load_template(dir + "/initial.txt");
                engine->run.templates.review = load_template(dir + "/review.txt");
            }
        }
        if (config.contains("judge")) {
            engine->run.judge = judge_from_json(config["judge"]);
            if (engine->run.judge.strategy == JudgeStrategy::model_backed) {
                engine->run.judge.model = engine->backend.get();
            }
        }
        validate_run_config(engine->run);

        *out_engine = engine.release();
        return MCOT_OK;
    } catch (const Json::parse_error& e) {
        return fail(MCOT_ERR_PARSE, std::string("engine config: ") + e.what());
    } catch (...) {
        return map_exception();
    }
}

void mcot_engine_destroy(mcot_engine* engine) {
    delete engine;
}

mcot_status mcot_run_task(mcot_engine* engine, const char* task_json,
                          char** out_trace_json) {
    if (engine == nullptr || task_json == nullptr || out_trace_json == nullptr) {
        return fail(MCOT_ERR_INVALID_ARGUMENT, "engine, task_json, out_trace_json required");
    }
    *out_trace_json = nullptr;
    try {
        Task task = task_from_json(Json::parse(task_json));
        RunOutcome outcome = run_multiplex(task, *engine->backend, engine->run);
        if (outcome.trace.has_value()) {
            *out_trace_json = copy_out(serialize_trace(*outcome.trace));
        }
        if (outcome.error.has_value()) {
            return fail(MCOT_ERR_PARTIAL, *outcome.error);
        }
        g_last_error.clear();
        return MCOT_OK;
    } catch (const Json::parse_error& e) {
        return fail(MCOT_ERR_PARSE, std::string("task: ") + e.what());
    } catch (...) {
        return map_exception();
    }
}

mcot_status mcot_run_corpus(mcot_engine* engine, const char* corpus_path,
                            const char* out_dir, const char* options_json,
                            char** out_summary_json) {
    if (engine == nullptr || corpus_path == nullptr || out_dir == nullptr ||
        out_summary_json == nullptr) {
        return fail(MCOT_ERR_INVALID_ARGUMENT,
                    "engine, corpus_path, out_dir, out_summary_json required");
    }
    *out_summary_json = nullptr;
    try {
        RunnerOptions opts;
        opts.out_dir = out_dir;
        if (options_json != nullptr && *options_json != '\0') {
            Json options = Json::parse(options_json);
            opts.parallel = options.value("parallel", 1);
            opts.resume = options.value("resume", false);
        }
        CorpusLoad corpus = load_corpus(corpus_path);
        RunSummary summary = run_corpus(corpus.tasks, *engine->backend, engine->run, opts);

        Json doc;
        doc["succeeded"] = summary.succeeded;
        doc["failed"] = summary.failed;
        doc["cached"] = summary.cached;
        doc["warnings"] = corpus.warnings;
        doc["results"] = Json::array();
        for (const TaskResult& result : summary.results) {
            Json entry;
            entry["task_id"] = result.task_id;
            entry["trace_file"] = result.trace_file;
            entry["status"] = result.cached ? "cached" : result.success ? "ok" : "failed";
            if (!result.error.empty()) entry["error"] = result.error;
            entry["warnings"] = result.warnings;
            doc["results"].push_back(std::move(entry));
        }
        *out_summary_json = copy_out(doc.dump(2) + "\n");
        if (summary.failed > 0) {
            return fail(MCOT_ERR_PARTIAL,
                        std::to_string(summary.failed) + " task(s) failed");
        }
        g_last_error.clear();
        return MCOT_OK;
    } catch (const Json::parse_error& e) {
        return fail(MCOT_ERR_PARSE, std::string("options: ") + e.what());
    } catch (...) {
        return map_exception();
    }
}

mcot_status mcot_score_trace(mcot_engine* engine, const char* trace_json,
                             const char* judge_json, char** out_metrics_json) {
    if (trace_json == nullptr || out_metrics_json == nullptr) {
        return fail(MCOT_ERR_INVALID_ARGUMENT, "trace_json and out_metrics_json required");
    }
    *out_metrics_json = nullptr;
    try {
        MultiplexTrace trace = deserialize_trace(trace_json);
        JudgeConfig judge;
        if (judge_json != nullptr && *judge_json != '\0') {
            judge = judge_from_json(Json::parse(judge_json));
        }
        if (judge.strategy == JudgeStrategy::model_backed) {
            if (engine == nullptr) {
                return fail(MCOT_ERR_INVALID_ARGUMENT,
                            "model_backed scoring requires an engine");
            }
            judge.model = engine->backend.get();
        }
        MetricsReport report = score_trace(trace, judge);

        Json doc;
        doc["task_id"] = trace.task_id;
        doc["rounds"] = static_cast<int>(trace.rounds.size());
        doc["c_raw"] = report.c_raw;
        doc["c_norm"] = rational_to_json(report.c_norm);
        doc["coherence"] = rational_to_json(report.coherence);
        doc["e_initial"] = report.e_initial;
        doc["e_corrected"] = report.e_corrected;
        doc["e_corr_rate"] = rational_to_json(report.e_corr_rate);
        doc["improvement_pct"] = report.improvement_pct.has_value()
                                     ? rational_to_json(*report.improvement_pct)
                                     : Json(nullptr);
        doc["deltas"] = Json::array();
        for (const Rational& delta : report.deltas) {
            doc["deltas"].push_back(rational_to_json(delta));
        }
        doc["total_improvement"] = rational_to_json(report.total_improvement);
        *out_metrics_json = copy_out(doc.dump(2) + "\n");
        g_last_error.clear();
        return MCOT_OK;
    } catch (const Json::parse_error& e) {
        return fail(MCOT_ERR_PARSE, std::string("judge config: ") + e.what());
    } catch (...) {
        return map_exception();
    }
}

mcot_status mcot_report(const char* trace_dir, const char* options_json,
                        char** out_report) {
    if (trace_dir == nullptr || out_report == nullptr) {
        return fail(MCOT_ERR_INVALID_ARGUMENT, "trace_dir and out_report required");
    }
    *out_report = nullptr;
    try {
        ReportOptions opts;
        bool judge_label_given = false;
        if (options_json != nullptr && *options_json != '\0') {
            Json options = Json::parse(options_json);
            if (options.contains("format")) {
                opts.format = report_format_from_string(options["format"].get<std::string>());
            }
            opts.pooled = options.value("pooled", false);
            if (options.contains("judge_label")) {
                opts.judge_strategy = options["judge_label"].get<std::string>();
                judge_label_given = true;
            }
        }
        std::vector<MultiplexTrace> traces = read_traces(trace_dir);
        if (traces.empty()) {
            throw ContractViolation("no traces found in " + std::string(trace_dir));
        }
        if (!judge_label_given) {
            const Json& snapshot = traces.front().config_snapshot;
            if (snapshot.contains("judge") && snapshot["judge"].contains("strategy")) {
                opts.judge_strategy = snapshot["judge"]["strategy"].get<std::string>();
            }
        }
        opts.per_task_improvement = mean_per_task_improvement(traces);
        std::vector<AggregateRow> rows = aggregate(traces, opts.pooled);
        *out_report = copy_out(render_report(rows, opts));
        g_last_error.clear();
        return MCOT_OK;
    } catch (const Json::parse_error& e) {
        return fail(MCOT_ERR_PARSE, std::string("report options: ") + e.what());
    } catch (...) {
        return map_exception();
    }
}

mcot_status mcot_record_corpus(mcot_engine* engine, const char* corpus_path,
                               const char* replay_path, char** out_summary_json) {
    if (engine == nullptr || corpus_path == nullptr || replay_path == nullptr ||
        out_summary_json == nullptr) {
        return fail(MCOT_ERR_INVALID_ARGUMENT,
                    "engine, corpus_path, replay_path, out_summary_json required");
    }
    *out_summary_json = nullptr;
    try {
        CorpusLoad corpus = load_corpus(corpus_path);
        ReplayStore store;
        RecordingBackend recorder(*engine->backend, store);

        int succeeded = 0, failed = 0;
        Json results = Json::array();
        for (const Task& task : corpus.tasks) {
            Json entry;
            entry["task_id"] = task.id;
            try {
                RunOutcome outcome = run_multiplex(task, recorder, engine->run);
                if (outcome.ok()) {
                    ++succeeded;
                    entry["status"] = "ok";
                } else {
                    ++failed;
                    entry["status"] = "failed";
                    entry["error"] = outcome.error.value_or("no trace");
                }
            } catch (const Error& e) {
                ++failed;
                entry["status"] = "failed";
                entry["error"] = e.what();
            }
            results.push_back(std::move(entry));
        }
        store.save(replay_path);

        Json doc;
        doc["succeeded"] = succeeded;
        doc["failed"] = failed;
        doc["recorded_prompts"] = static_cast<int>(store.size());
        doc["results"] = std::move(results);
        *out_summary_json = copy_out(doc.dump(2) + "\n");
        if (failed > 0) {
            return fail(MCOT_ERR_PARTIAL, std::to_string(failed) + " task(s) failed");
        }
        g_last_error.clear();
        return MCOT_OK;
    } catch (...) {
        return map_exception();
    }
}

mcot_status mcot_parse_chain(const char* text, char** out_chain_json) {
    if (text == nullptr || out_chain_json == nullptr) {
        return fail(MCOT_ERR_INVALID_ARGUMENT, "text and out_chain_json required");
    }
    *out_chain_json = nullptr;
    try {
        ParseReport report = parse_chain(text, ParserConfig::defaults());
        Json doc;
        doc["chain"] = chain_to_json(report.chain);
        doc["warnings"] = report.warnings;
        *out_chain_json = copy_out(doc.dump(2) + "\n");
        g_last_error.clear();
        return MCOT_OK;
    } catch (...) {
        return map_exception();
    }
}

} // extern "C"
