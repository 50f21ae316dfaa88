// mcot: command-line front end over the shared-library C API.
#include <mcot/mcot.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using Json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitConfig = 2;

struct OwnedString {
    char* value = nullptr;
    ~OwnedString() { mcot_string_free(value); }
    std::string str() const { return value ? value : ""; }
};

struct BackendFlags {
    std::string backend;
    std::string replay_file;
    std::string error_rate = "0.3";
    std::string correction_prob = "0.5";
    int steps_per_chain = 10;
    std::string model = "default";
    std::string base_url;
};

struct RunFlags {
    int rounds = 2;
    std::string epsilon = "0";
    std::string judge = "lexical";
    std::string prompt_mode = "combined";
    std::optional<std::uint64_t> seed;
    std::string error_marker;
    std::string threshold = "0.2";
    std::string stopword_file;
    std::string prompt_dir;
    std::string temperature = "0";
    int max_tokens = 4096;
    std::int64_t timeout_ms = 30000;
};

void add_backend_flags(CLI::App* cmd, BackendFlags& flags, bool required) {
    auto* opt = cmd->add_option("--backend", flags.backend, "Backend kind")
                    ->check(CLI::IsMember({"http", "replay", "synthetic"}));
    if (required) opt->required();
    cmd->add_option("--replay-file", flags.replay_file, "Replay store (replay backend)");
    cmd->add_option("--error-rate", flags.error_rate,
                    "Synthetic per-step error probability p");
    cmd->add_option("--correction-prob", flags.correction_prob,
                    "Synthetic per-round correction probability q");
    cmd->add_option("--steps", flags.steps_per_chain, "Synthetic content steps per chain");
    cmd->add_option("--model", flags.model, "Model name (http backend)");
    cmd->add_option("--base-url", flags.base_url,
                    "Chat-completions base URL (default MCOT_API_BASE)");
}

void add_run_flags(CLI::App* cmd, RunFlags& flags) {
    cmd->add_option("--rounds", flags.rounds, "Max reasoning rounds K");
    cmd->add_option("--epsilon", flags.epsilon, "Stop when delta falls below this");
    cmd->add_option("--judge", flags.judge, "Judge strategy")
        ->check(CLI::IsMember({"lexical", "annotated", "model"}));
    cmd->add_option("--prompt-mode", flags.prompt_mode, "Prompting style")
        ->check(CLI::IsMember({"combined", "two_call"}));
    cmd->add_option("--seed", flags.seed, "Seed for seedable backends");
    cmd->add_option("--error-marker", flags.error_marker,
                    "Token marking a wrong step in backend output");
    cmd->add_option("--threshold", flags.threshold, "Lexical judge threshold");
    cmd->add_option("--stopwords", flags.stopword_file, "Stopword list file");
    cmd->add_option("--prompts", flags.prompt_dir,
                    "Directory with combined.txt/initial.txt/review.txt");
    cmd->add_option("--temperature", flags.temperature, "Sampling temperature");
    cmd->add_option("--max-tokens", flags.max_tokens, "Max output tokens per call");
    cmd->add_option("--timeout-ms", flags.timeout_ms, "Per-call timeout");
}

std::string engine_config(const BackendFlags& backend, const RunFlags& run) {
    Json config;
    config["backend"]["kind"] = backend.backend;
    if (backend.backend == "replay") {
        config["backend"]["replay_file"] = backend.replay_file;
    } else if (backend.backend == "synthetic") {
        config["backend"]["error_rate"] = backend.error_rate;
        config["backend"]["correction_prob"] = backend.correction_prob;
        config["backend"]["steps_per_chain"] = backend.steps_per_chain;
        if (run.seed.has_value()) config["backend"]["rng_seed"] = *run.seed;
    } else if (backend.backend == "http") {
        config["backend"]["model"] = backend.model;
        if (!backend.base_url.empty()) config["backend"]["base_url"] = backend.base_url;
    }

    config["run"]["max_rounds"] = run.rounds;
    config["run"]["epsilon"] = run.epsilon;
    config["run"]["prompt_mode"] = run.prompt_mode;
    if (run.seed.has_value()) config["run"]["seed"] = *run.seed;
    if (!run.error_marker.empty()) config["run"]["error_marker"] = run.error_marker;
    config["run"]["temperature"] = run.temperature;
    config["run"]["max_output_tokens"] = run.max_tokens;
    config["run"]["timeout_ms"] = run.timeout_ms;
    if (!run.prompt_dir.empty()) config["run"]["prompt_dir"] = run.prompt_dir;

    config["judge"]["strategy"] = run.judge == "model" ? "model_backed" : run.judge;
    config["judge"]["lexical_threshold"] = run.threshold;
    if (!run.stopword_file.empty()) config["judge"]["stopword_file"] = run.stopword_file;
    return config.dump();
}

int report_failure(const char* stage, mcot_status status) {
    std::cerr << stage << ": " << mcot_status_name(status) << ": " << mcot_last_error()
              << "\n";
    return status == MCOT_ERR_PARTIAL ? kExitPartial : kExitConfig;
}

class Engine {
public:
    Engine() = default;
    ~Engine() { mcot_engine_destroy(engine_); }
    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    mcot_status create(const std::string& config) {
        return mcot_engine_create(config.c_str(), &engine_);
    }
    mcot_engine* get() const { return engine_; }

private:
    mcot_engine* engine_ = nullptr;
};

std::optional<std::string> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

bool write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) return false;
    out << content;
    return static_cast<bool>(out);
}

void print_run_summary(const std::string& summary_json) {
    Json summary = Json::parse(summary_json);
    std::cout << "succeeded: " << summary.value("succeeded", 0)
              << "  failed: " << summary.value("failed", 0)
              << "  cached: " << summary.value("cached", 0) << "\n";
    for (const Json& entry : summary.value("results", Json::array())) {
        if (entry.value("status", "") == "failed") {
            std::cout << "  " << entry.value("task_id", "?") << ": "
                      << entry.value("error", "") << "\n";
        }
        for (const Json& warning : entry.value("warnings", Json::array())) {
            std::cout << "  " << entry.value("task_id", "?") << " [warning] "
                      << warning.get<std::string>() << "\n";
        }
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiplex CoT runner: generate, critique, refine, and score "
                 "chains of thought"};
    app.require_subcommand(1);

    // run
    auto* run_cmd = app.add_subcommand("run", "Run a corpus and write trace files");
    std::string corpus_path, out_dir;
    int parallel = 1;
    bool resume = false;
    BackendFlags run_backend;
    RunFlags run_flags;
    run_cmd->add_option("--corpus", corpus_path, "JSONL corpus")->required();
    run_cmd->add_option("--out", out_dir, "Output directory")->required();
    run_cmd->add_option("--parallel", parallel, "Worker count");
    run_cmd->add_flag("--resume", resume, "Skip tasks with existing trace files");
    add_backend_flags(run_cmd, run_backend, true);
    add_run_flags(run_cmd, run_flags);

    // score
    auto* score_cmd = app.add_subcommand("score", "Recompute metrics for one trace");
    std::string trace_path;
    BackendFlags score_backend;
    RunFlags score_flags;
    score_cmd->add_option("--trace", trace_path, "Trace file")->required();
    add_backend_flags(score_cmd, score_backend, false);
    add_run_flags(score_cmd, score_flags);

    // report
    auto* report_cmd = app.add_subcommand("report", "Aggregate traces into a report");
    std::string in_dir, report_format = "markdown", report_out;
    bool pooled = false;
    report_cmd->add_option("--in", in_dir, "Directory of trace files")->required();
    report_cmd->add_option("--format", report_format, "Output format")
        ->check(CLI::IsMember({"markdown", "csv", "json"}));
    report_cmd->add_flag("--pooled", pooled, "Pooled pair counts instead of means");
    report_cmd->add_option("--out", report_out, "Output file (default stdout)");

    // record
    auto* record_cmd = app.add_subcommand("record",
                                          "Run a corpus and capture responses into a "
                                          "replay store");
    std::string record_corpus, record_out;
    BackendFlags record_backend;
    RunFlags record_flags;
    record_cmd->add_option("--corpus", record_corpus, "JSONL corpus")->required();
    record_cmd->add_option("--out", record_out, "Replay store to write")->required();
    add_backend_flags(record_cmd, record_backend, true);
    add_run_flags(record_cmd, record_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    if (run_cmd->parsed()) {
        if (run_backend.backend == "replay" && run_backend.replay_file.empty()) {
            std::cerr << "run: --replay-file is required with --backend replay\n";
            return kExitConfig;
        }
        Engine engine;
        mcot_status status = engine.create(engine_config(run_backend, run_flags));
        if (status != MCOT_OK) return report_failure("run", status);

        Json options{{"parallel", parallel}, {"resume", resume}};
        OwnedString summary;
        status = mcot_run_corpus(engine.get(), corpus_path.c_str(), out_dir.c_str(),
                                 options.dump().c_str(), &summary.value);
        if (summary.value != nullptr) print_run_summary(summary.str());
        if (status == MCOT_OK) return kExitOk;
        return report_failure("run", status);
    }

    if (score_cmd->parsed()) {
        std::optional<std::string> trace = read_file(trace_path);
        if (!trace.has_value()) {
            std::cerr << "score: cannot read " << trace_path << "\n";
            return kExitConfig;
        }
        Engine engine;
        mcot_engine* engine_ptr = nullptr;
        if (score_flags.judge == "model") {
            if (score_backend.backend.empty()) {
                std::cerr << "score: --judge model requires --backend\n";
                return kExitConfig;
            }
            mcot_status status = engine.create(engine_config(score_backend, score_flags));
            if (status != MCOT_OK) return report_failure("score", status);
            engine_ptr = engine.get();
        }
        Json judge;
        judge["strategy"] = score_flags.judge == "model" ? "model_backed" : score_flags.judge;
        judge["lexical_threshold"] = score_flags.threshold;
        if (!score_flags.stopword_file.empty()) {
            judge["stopword_file"] = score_flags.stopword_file;
        }
        OwnedString metrics;
        mcot_status status = mcot_score_trace(engine_ptr, trace->c_str(),
                                              judge.dump().c_str(), &metrics.value);
        if (status != MCOT_OK) return report_failure("score", status);
        std::cout << metrics.str();
        return kExitOk;
    }

    if (report_cmd->parsed()) {
        Json options;
        options["format"] = report_format;
        options["pooled"] = pooled;
        OwnedString rendered;
        mcot_status status = mcot_report(in_dir.c_str(), options.dump().c_str(),
                                         &rendered.value);
        if (status != MCOT_OK) return report_failure("report", status);
        if (report_out.empty()) {
            std::cout << rendered.str();
        } else if (!write_file(report_out, rendered.str())) {
            std::cerr << "report: cannot write " << report_out << "\n";
            return kExitConfig;
        }
        return kExitOk;
    }

    if (record_cmd->parsed()) {
        Engine engine;
        mcot_status status = engine.create(engine_config(record_backend, record_flags));
        if (status != MCOT_OK) return report_failure("record", status);
        OwnedString summary;
        status = mcot_record_corpus(engine.get(), record_corpus.c_str(),
                                    record_out.c_str(), &summary.value);
        if (summary.value != nullptr) std::cout << summary.str();
        if (status == MCOT_OK) return kExitOk;
        return report_failure("record", status);
    }

    return kExitConfig;
}
