#pragma once

#include "mcot/backend.hpp"
#include "mcot/chain.hpp"
#include "mcot/orchestrator.hpp"
#include "mcot/rational.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mcot {

struct CorpusLoad {
    std::vector<Task> tasks;
    std::vector<std::string> warnings;
};

// JSON-lines corpus; all malformed/duplicate lines are reported together,
// each prefixed "line N:".
CorpusLoad load_corpus(const std::string& path);

struct RunnerOptions {
    std::string out_dir;
    int parallel = 1;
    bool resume = false;  // skip tasks whose trace file already exists
};

struct TaskResult {
    std::string task_id;
    std::string trace_file;
    bool success = false;
    bool cached = false;  // satisfied by an existing trace under --resume
    std::string error;
    std::vector<std::string> warnings;
};

struct RunSummary {
    int succeeded = 0;
    int failed = 0;
    int cached = 0;
    std::vector<TaskResult> results;  // sorted by task_id
};

// Runs every task with a bounded worker pool, writing trace_<id>.json per
// task and manifest.json at the end. A failing task never aborts the batch.
RunSummary run_corpus(const std::vector<Task>& tasks, Backend& backend,
                      const RunConfig& cfg, const RunnerOptions& opts);

std::string trace_file_name(const std::string& task_id);

// Loads every trace listed in dir/manifest.json (or all trace_*.json files
// when no manifest exists).
std::vector<MultiplexTrace> read_traces(const std::string& dir);

struct AggregateRow {
    TaskCategory category = TaskCategory::other;
    Rational mean_c_cot;
    Rational mean_c_refined;
    std::optional<Rational> mean_improvement;  // undefined when mean_c_cot = 0
    Rational mean_e_corr;
    int task_count = 0;
};

// Groups traces by category. mean_e_corr averages over traces with at least
// one initial error (100 when every trace is error-free); improvement applies
// the relative formula to the category means. pooled switches the consistency
// columns from mean-of-chains to pooled pair counts.
std::vector<AggregateRow> aggregate(const std::vector<MultiplexTrace>& traces, bool pooled);

// Mean of per-trace improvement percentages, where defined.
std::optional<Rational> mean_per_task_improvement(const std::vector<MultiplexTrace>& traces);

enum class ReportFormat { markdown, csv, json };

ReportFormat report_format_from_string(const std::string& s);

struct ReportOptions {
    ReportFormat format = ReportFormat::markdown;
    std::string judge_strategy = "lexical";
    bool pooled = false;
    std::optional<Rational> per_task_improvement;
};

std::string render_report(const std::vector<AggregateRow>& rows, const ReportOptions& opts);

void emit_report(const std::vector<AggregateRow>& rows, const ReportOptions& opts,
                 const std::string& path);

std::string category_display_name(TaskCategory category);

} // namespace mcot
