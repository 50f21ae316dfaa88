#include "mcot/runner.hpp"

#include "mcot/errors.hpp"
#include "mcot/metrics.hpp"
#include "mcot/trace_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace mcot {

CorpusLoad load_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoFailure("cannot open corpus: " + path);
    }
    CorpusLoad load;
    std::vector<std::string> errors;
    std::set<std::string> seen_ids;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            Task task = task_from_json(Json::parse(line));
            if (!seen_ids.insert(task.id).second) {
                errors.push_back("line " + std::to_string(line_no) + ": duplicate id \"" +
                                 task.id + "\"");
                continue;
            }
            load.tasks.push_back(std::move(task));
        } catch (const nlohmann::json::parse_error& e) {
            errors.push_back("line " + std::to_string(line_no) + ": " + e.what());
        } catch (const Error& e) {
            errors.push_back("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!errors.empty()) {
        std::string joined;
        for (const std::string& error : errors) {
            if (!joined.empty()) joined += "; ";
            joined += error;
        }
        throw ParseFailure("corpus " + path + ": " + joined);
    }
    if (load.tasks.empty()) {
        load.warnings.push_back("corpus " + path + " contains no tasks");
    }
    return load;
}

std::string trace_file_name(const std::string& task_id) {
    std::string safe;
    for (char c : task_id) {
        bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' ||
                  c == '-';
        safe.push_back(ok ? c : '_');
    }
    return "trace_" + safe + ".json";
}

RunSummary run_corpus(const std::vector<Task>& tasks, Backend& backend,
                      const RunConfig& cfg, const RunnerOptions& opts) {
    validate_run_config(cfg);
    if (opts.parallel < 1) {
        throw ContractViolation("parallel worker count must be positive");
    }

    fs::path out_dir(opts.out_dir);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    {
        // prove the directory is writable before any backend call
        fs::path probe = out_dir / ".write_probe";
        std::ofstream probe_out(probe);
        if (!probe_out) {
            throw IoFailure("output directory not writable: " + opts.out_dir);
        }
        probe_out.close();
        fs::remove(probe, ec);
    }

    RunSummary summary;
    summary.results.resize(tasks.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) break;
            const Task& task = tasks[i];
            TaskResult& result = summary.results[i];
            result.task_id = task.id;
            result.trace_file = trace_file_name(task.id);
            fs::path trace_path = out_dir / result.trace_file;

            if (opts.resume && fs::exists(trace_path)) {
                result.success = true;
                result.cached = true;
                continue;
            }
            try {
                RunOutcome outcome = run_multiplex(task, backend, cfg);
                result.warnings = outcome.warnings;
                if (!outcome.ok()) {
                    result.error = outcome.error.value_or("run produced no trace");
                    continue;
                }
                std::ofstream out(trace_path, std::ios::binary | std::ios::trunc);
                if (!out) {
                    result.error = "cannot write " + trace_path.string();
                    continue;
                }
                out << serialize_trace(*outcome.trace);
                if (!out) {
                    result.error = "failed while writing " + trace_path.string();
                    continue;
                }
                result.success = true;
            } catch (const std::exception& e) {
                result.error = e.what();
            }
        }
    };

    std::size_t worker_count =
        std::min<std::size_t>(static_cast<std::size_t>(opts.parallel),
                              std::max<std::size_t>(tasks.size(), 1));
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < worker_count; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();

    std::sort(summary.results.begin(), summary.results.end(),
              [](const TaskResult& a, const TaskResult& b) { return a.task_id < b.task_id; });
    for (const TaskResult& result : summary.results) {
        if (result.cached) {
            ++summary.cached;
            ++summary.succeeded;
        } else if (result.success) {
            ++summary.succeeded;
        } else {
            ++summary.failed;
        }
    }

    Json manifest;
    manifest["tasks"] = Json::array();
    for (const TaskResult& result : summary.results) {
        Json entry;
        entry["task_id"] = result.task_id;
        entry["trace_file"] = result.trace_file;
        entry["status"] = result.cached ? "cached" : result.success ? "ok" : "failed";
        if (!result.error.empty()) entry["error"] = result.error;
        manifest["tasks"].push_back(std::move(entry));
    }
    std::ofstream manifest_out(out_dir / "manifest.json", std::ios::binary | std::ios::trunc);
    if (!manifest_out) {
        throw IoFailure("cannot write manifest in " + opts.out_dir);
    }
    manifest_out << manifest.dump(2) << '\n';
    return summary;
}

std::vector<MultiplexTrace> read_traces(const std::string& dir) {
    fs::path base(dir);
    std::vector<fs::path> files;

    fs::path manifest_path = base / "manifest.json";
    if (fs::exists(manifest_path)) {
        std::ifstream in(manifest_path, std::ios::binary);
        if (!in) {
            throw IoFailure("cannot open " + manifest_path.string());
        }
        Json manifest;
        try {
            manifest = Json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseFailure(manifest_path.string() + ": " + e.what());
        }
        if (!manifest.contains("tasks") || !manifest["tasks"].is_array()) {
            throw ParseFailure(manifest_path.string() + ": missing tasks array");
        }
        for (const Json& entry : manifest["tasks"]) {
            if (entry.value("status", "") == "failed") continue;
            files.emplace_back(base / entry.value("trace_file", ""));
        }
    } else {
        if (!fs::is_directory(base)) {
            throw IoFailure("not a directory: " + dir);
        }
        for (const fs::directory_entry& entry : fs::directory_iterator(base)) {
            std::string name = entry.path().filename().string();
            if (name.rfind("trace_", 0) == 0 && name.size() > 5 &&
                name.substr(name.size() - 5) == ".json") {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
    }

    std::vector<MultiplexTrace> traces;
    traces.reserve(files.size());
    for (const fs::path& file : files) {
        std::ifstream in(file, std::ios::binary);
        if (!in) {
            throw IoFailure("cannot open trace: " + file.string());
        }
        std::ostringstream buffer;
        buffer << in.rdbuf();
        traces.push_back(deserialize_trace(buffer.str()));
    }
    return traces;
}

std::string category_display_name(TaskCategory category) {
    switch (category) {
        case TaskCategory::arithmetic: return "Arithmetic Problem-Solving";
        case TaskCategory::commonsense: return "Commonsense Reasoning";
        case TaskCategory::ethical: return "Ethical Decision-Making";
        case TaskCategory::logical_puzzle: return "Logical Puzzles";
        case TaskCategory::other: return "Other";
    }
    throw ContractViolation("unknown TaskCategory");
}

namespace {

TaskCategory trace_category(const MultiplexTrace& trace) {
    if (trace.config_snapshot.contains("category") &&
        trace.config_snapshot["category"].is_string()) {
        return category_from_string(trace.config_snapshot["category"].get<std::string>());
    }
    return TaskCategory::other;
}

struct Bucket {
    std::vector<const MultiplexTrace*> traces;
};

} // namespace

std::vector<AggregateRow> aggregate(const std::vector<MultiplexTrace>& traces, bool pooled) {
    if (traces.empty()) {
        throw ContractViolation("aggregate: no traces");
    }
    std::map<TaskCategory, Bucket> buckets;
    for (const MultiplexTrace& trace : traces) {
        buckets[trace_category(trace)].traces.push_back(&trace);
    }

    std::vector<AggregateRow> rows;
    for (const auto& [category, bucket] : buckets) {
        AggregateRow row;
        row.category = category;
        row.task_count = static_cast<int>(bucket.traces.size());

        Rational sum_c0, sum_ck;
        Rational pooled_raw0, pooled_rawk;
        std::int64_t pooled_pairs0 = 0, pooled_pairsk = 0;
        Rational sum_e_corr;
        std::int64_t counted_e = 0;
        std::int64_t pooled_initial = 0, pooled_corrected = 0;

        for (const MultiplexTrace* trace : bucket.traces) {
            const RoundRecord& first = trace->rounds.front();
            const RoundRecord& last = trace->rounds.back();
            sum_c0 = sum_c0 + first.consistency;
            sum_ck = sum_ck + last.consistency;

            std::int64_t pairs0 = std::max(first.chain.n() - 1, 0);
            std::int64_t pairsk = std::max(last.chain.n() - 1, 0);
            pooled_raw0 = pooled_raw0 + first.consistency * Rational(pairs0);
            pooled_rawk = pooled_rawk + last.consistency * Rational(pairsk);
            pooled_pairs0 += pairs0;
            pooled_pairsk += pairsk;

            ErrorCounts errors = count_errors(*trace);
            pooled_initial += errors.initial;
            pooled_corrected += errors.corrected;
            if (errors.initial > 0) {
                sum_e_corr = sum_e_corr + error_correction_rate(errors.initial, errors.corrected);
                ++counted_e;
            }
        }

        std::int64_t count = static_cast<std::int64_t>(bucket.traces.size());
        if (pooled) {
            row.mean_c_cot = pooled_pairs0 == 0 ? Rational(1)
                                                : pooled_raw0 / Rational(pooled_pairs0);
            row.mean_c_refined = pooled_pairsk == 0 ? Rational(1)
                                                    : pooled_rawk / Rational(pooled_pairsk);
            row.mean_e_corr = pooled_initial == 0
                                  ? Rational(100)
                                  : Rational(pooled_corrected, pooled_initial) * Rational(100);
        } else {
            row.mean_c_cot = sum_c0 / Rational(count);
            row.mean_c_refined = sum_ck / Rational(count);
            row.mean_e_corr = counted_e == 0 ? Rational(100)
                                             : sum_e_corr / Rational(counted_e);
        }
        if (!row.mean_c_cot.is_zero()) {
            row.mean_improvement = reasoning_improvement(row.mean_c_cot, row.mean_c_refined);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::optional<Rational> mean_per_task_improvement(const std::vector<MultiplexTrace>& traces) {
    Rational sum;
    std::int64_t count = 0;
    for (const MultiplexTrace& trace : traces) {
        const Rational& c0 = trace.rounds.front().consistency;
        if (c0.is_zero()) continue;
        sum = sum + reasoning_improvement(c0, trace.rounds.back().consistency);
        ++count;
    }
    if (count == 0) return std::nullopt;
    return sum / Rational(count);
}

ReportFormat report_format_from_string(const std::string& s) {
    if (s == "markdown" || s == "md") return ReportFormat::markdown;
    if (s == "csv") return ReportFormat::csv;
    if (s == "json") return ReportFormat::json;
    throw ParseFailure("unknown report format: " + s);
}

namespace {

std::string methodology_note(const ReportOptions& opts) {
    std::string note = "Judge strategy: " + opts.judge_strategy + ". Aggregation: ";
    note += opts.pooled ? "pooled pair counts." : "mean of per-chain normalized scores.";
    note += " CoT and MCoT columns are normalized logical-consistency scores scaled to"
            " percent; the improvement column applies (MCoT - CoT) / CoT x 100 to the"
            " category means. Caveat: for the reference pair (85, 92) that formula yields"
            " 8.24%, not the +7% often quoted alongside it; this report always states the"
            " formula value and flags the mismatch rather than reconciling it.";
    return note;
}

std::string percent_cell(const Rational& value) {
    return (value * Rational(100)).to_decimal(2);
}

std::string improvement_cell(const std::optional<Rational>& value, bool with_sign) {
    if (!value.has_value()) return "undefined";
    std::string rendered = value->to_decimal(2);
    if (with_sign && !value->is_negative() && !value->is_zero()) rendered = "+" + rendered;
    return rendered + "%";
}

std::string render_markdown(const std::vector<AggregateRow>& rows, const ReportOptions& opts) {
    std::string out = "# Multiplex CoT Report\n\n";
    out += "| Task | CoT | MCoT | Logical Consistency Improvement | Error Correction Rate |\n";
    out += "| --- | --- | --- | --- | --- |\n";
    for (const AggregateRow& row : rows) {
        out += "| " + category_display_name(row.category) + " | " +
               percent_cell(row.mean_c_cot) + "% | " + percent_cell(row.mean_c_refined) +
               "% | " + improvement_cell(row.mean_improvement, true) + " | " +
               row.mean_e_corr.to_decimal(2) + "% |\n";
    }
    out += "\n_Methodology: " + methodology_note(opts) + "_\n";
    return out;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

std::string render_csv(const std::vector<AggregateRow>& rows, const ReportOptions& opts) {
    std::string out = "# methodology: " + methodology_note(opts) + "\n";
    out += "category,task_count,cot,mcot,improvement,e_corr\n";
    for (const AggregateRow& row : rows) {
        out += csv_escape(category_display_name(row.category)) + "," +
               std::to_string(row.task_count) + "," + percent_cell(row.mean_c_cot) + "," +
               percent_cell(row.mean_c_refined) + "," +
               (row.mean_improvement.has_value() ? row.mean_improvement->to_decimal(2)
                                                 : std::string()) +
               "," + row.mean_e_corr.to_decimal(2) + "\n";
    }
    return out;
}

Json rational_cell(const Rational& value, bool scale_to_percent) {
    Rational shown = scale_to_percent ? value * Rational(100) : value;
    Json cell;
    cell["num"] = shown.num();
    cell["den"] = shown.den();
    cell["rendered"] = shown.to_decimal(2);
    return cell;
}

std::string render_json(const std::vector<AggregateRow>& rows, const ReportOptions& opts) {
    Json doc;
    doc["methodology"] = methodology_note(opts);
    doc["aggregation"] = opts.pooled ? "pooled" : "mean";
    doc["rows"] = Json::array();
    for (const AggregateRow& row : rows) {
        Json entry;
        entry["category"] = category_display_name(row.category);
        entry["task_count"] = row.task_count;
        entry["cot"] = rational_cell(row.mean_c_cot, true);
        entry["mcot"] = rational_cell(row.mean_c_refined, true);
        entry["improvement"] = row.mean_improvement.has_value()
                                   ? rational_cell(*row.mean_improvement, false)
                                   : Json(nullptr);
        entry["e_corr"] = rational_cell(row.mean_e_corr, false);
        doc["rows"].push_back(std::move(entry));
    }
    doc["mean_per_task_improvement"] = opts.per_task_improvement.has_value()
                                           ? rational_cell(*opts.per_task_improvement, false)
                                           : Json(nullptr);
    return doc.dump(2) + "\n";
}

} // namespace

std::string render_report(const std::vector<AggregateRow>& rows, const ReportOptions& opts) {
    if (rows.empty()) {
        throw ContractViolation("render_report: no rows");
    }
    switch (opts.format) {
        case ReportFormat::markdown: return render_markdown(rows, opts);
        case ReportFormat::csv: return render_csv(rows, opts);
        case ReportFormat::json: return render_json(rows, opts);
    }
    throw ContractViolation("unknown ReportFormat");
}

void emit_report(const std::vector<AggregateRow>& rows, const ReportOptions& opts,
                 const std::string& path) {
    std::string rendered = render_report(rows, opts);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoFailure("cannot write report: " + path);
    }
    out << rendered;
    if (!out) {
        throw IoFailure("failed while writing report: " + path);
    }
}

} // namespace mcot
