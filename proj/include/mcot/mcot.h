/* Multiplex CoT engine: C API for the shared library.
 *
 * Conventions:
 *   - Every function returning mcot_status sets the thread-local error
 *     message readable via mcot_last_error() on failure.
 *   - Output strings (char**) are malloc-allocated, UTF-8, NUL-terminated;
 *     release them with mcot_string_free().
 *   - JSON in, JSON out. Rationals appear as {"num": int, "den": int};
 *     config files may also write them as decimal strings ("0.2"), parsed
 *     exactly.
 */
#ifndef MCOT_H
#define MCOT_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mcot_status {
    MCOT_OK = 0,
    MCOT_ERR_INVALID_ARGUMENT = 1,
    MCOT_ERR_PARSE = 2,
    MCOT_ERR_VALIDATION = 3,
    MCOT_ERR_IO = 4,
    MCOT_ERR_BACKEND = 5,
    MCOT_ERR_MISSING_ANNOTATION = 6,
    MCOT_ERR_CONTRACT = 7,
    MCOT_ERR_PARTIAL = 8,
    MCOT_ERR_INTERNAL = 9
} mcot_status;

/* Opaque engine: one configured backend + run + judge configuration. */
typedef struct mcot_engine mcot_engine;

const char* mcot_version(void);
const char* mcot_status_name(mcot_status status);

/* Message for the most recent failure on this thread; empty when none. */
const char* mcot_last_error(void);

void mcot_string_free(char* s);

/* config_json:
 * {
 *   "backend": {
 *     "kind": "synthetic" | "replay" | "http",
 *     // synthetic: "error_rate", "correction_prob", "steps_per_chain"
 *     // replay:    "replay_file"
 *     // http:      "base_url"?, "api_key"?, "model"?
 *   },
 *   "run": {
 *     "max_rounds"?: int, "epsilon"?: rational, "prompt_mode"?: "combined"|"two_call",
 *     "seed"?: int, "error_marker"?: string, "temperature"?: rational,
 *     "max_output_tokens"?: int, "timeout_ms"?: int, "prompt_dir"?: string
 *   },
 *   "judge"?: { "strategy"?: "lexical"|"annotated"|"model_backed",
 *               "lexical_threshold"?: rational, "stopword_file"?: string }
 * }
 */
mcot_status mcot_engine_create(const char* config_json, mcot_engine** out_engine);
void mcot_engine_destroy(mcot_engine* engine);

/* Runs the protocol for one task ({"id","category","question",...}).
 * On MCOT_ERR_PARTIAL a partial trace may still be returned. */
mcot_status mcot_run_task(mcot_engine* engine, const char* task_json,
                          char** out_trace_json);

/* Runs a JSONL corpus, writing trace files and manifest.json into out_dir.
 * options_json (may be NULL): {"parallel"?: int, "resume"?: bool}.
 * Returns a summary: {"succeeded","failed","cached","results":[...]}.
 * MCOT_ERR_PARTIAL when some tasks failed. */
mcot_status mcot_run_corpus(mcot_engine* engine, const char* corpus_path,
                            const char* out_dir, const char* options_json,
                            char** out_summary_json);

/* Recomputes all metrics for one serialized trace.
 * judge_json (may be NULL for defaults) as in engine config; engine may be
 * NULL unless the judge strategy is model_backed. */
mcot_status mcot_score_trace(mcot_engine* engine, const char* trace_json,
                             const char* judge_json, char** out_metrics_json);

/* Aggregates a directory of traces into a report.
 * options_json (may be NULL): {"format"?: "markdown"|"csv"|"json",
 * "pooled"?: bool, "judge_label"?: string}. */
mcot_status mcot_report(const char* trace_dir, const char* options_json,
                        char** out_report);

/* Runs a corpus against the engine's backend while recording every
 * prompt/response pair into replay_path (JSONL replay store). */
mcot_status mcot_record_corpus(mcot_engine* engine, const char* corpus_path,
                               const char* replay_path, char** out_summary_json);

/* Parses free text into a chain: {"chain": {...}, "warnings": [...]}. */
mcot_status mcot_parse_chain(const char* text, char** out_chain_json);

#ifdef __cplusplus
}
#endif

#endif /* MCOT_H */
