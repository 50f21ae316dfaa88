#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <mcot/mcot.h>

#include <json.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string str() const { return path.string(); }
};

struct OwnedString {
    char* ptr = nullptr;
    ~OwnedString() { mcot_string_free(ptr); }
    std::string str() const { return ptr == nullptr ? std::string() : std::string(ptr); }
};

struct Engine {
    mcot_engine* handle = nullptr;
    ~Engine() { mcot_engine_destroy(handle); }
};

mcot_status make_engine(const json& config, Engine& engine) {
    return mcot_engine_create(config.dump().c_str(), &engine.handle);
}

json synthetic_config() {
    return json{
        {"backend",
         {{"kind", "synthetic"},
          {"error_rate", 1.0},
          {"correction_prob", 1.0},
          {"steps_per_chain", 4},
          {"rng_seed", 2}}},
        {"run", {{"max_rounds", 2}, {"prompt_mode", "combined"}}},
        {"judge", {{"strategy", "annotated"}}},
    };
}

std::string task_json(const std::string& id, const std::string& question) {
    return json{{"id", id}, {"category", "arithmetic"}, {"question", question}}.dump();
}

void write_corpus(const fs::path& path, const std::vector<std::string>& questions) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    for (std::size_t i = 0; i < questions.size(); ++i) {
        out << task_json("task-" + std::to_string(i), questions[i]) << "\n";
    }
}

} // namespace

TEST_CASE("version and status names") {
    CHECK(std::string(mcot_version()) == "0.1.0");
    CHECK(std::string(mcot_status_name(MCOT_OK)) == "MCOT_OK");
    CHECK(std::string(mcot_status_name(MCOT_ERR_INVALID_ARGUMENT)) ==
          "MCOT_ERR_INVALID_ARGUMENT");
    CHECK(std::string(mcot_status_name(MCOT_ERR_PARSE)) == "MCOT_ERR_PARSE");
    CHECK(std::string(mcot_status_name(MCOT_ERR_VALIDATION)) == "MCOT_ERR_VALIDATION");
    CHECK(std::string(mcot_status_name(MCOT_ERR_IO)) == "MCOT_ERR_IO");
    CHECK(std::string(mcot_status_name(MCOT_ERR_BACKEND)) == "MCOT_ERR_BACKEND");
    CHECK(std::string(mcot_status_name(MCOT_ERR_MISSING_ANNOTATION)) ==
          "MCOT_ERR_MISSING_ANNOTATION");
    CHECK(std::string(mcot_status_name(MCOT_ERR_CONTRACT)) == "MCOT_ERR_CONTRACT");
    CHECK(std::string(mcot_status_name(MCOT_ERR_PARTIAL)) == "MCOT_ERR_PARTIAL");
    CHECK(std::string(mcot_status_name(MCOT_ERR_INTERNAL)) == "MCOT_ERR_INTERNAL");
    CHECK(std::string(mcot_status_name(static_cast<mcot_status>(99))) == "MCOT_ERR_UNKNOWN");

    mcot_string_free(nullptr);  // must be a no-op
    mcot_engine_destroy(nullptr);
}

TEST_CASE("engine creation rejects bad configs with messages") {
    Engine engine;
    CHECK(mcot_engine_create(nullptr, &engine.handle) == MCOT_ERR_INVALID_ARGUMENT);
    CHECK(mcot_engine_create("{}", nullptr) == MCOT_ERR_INVALID_ARGUMENT);

    CHECK(mcot_engine_create("{not json", &engine.handle) == MCOT_ERR_PARSE);
    CHECK(std::string(mcot_last_error()).find("engine config:") != std::string::npos);

    CHECK(mcot_engine_create("{}", &engine.handle) == MCOT_ERR_PARSE);
    CHECK(std::string(mcot_last_error()) == "engine config requires backend.kind");

    json unknown = {{"backend", {{"kind", "quantum"}}}};
    CHECK(make_engine(unknown, engine) == MCOT_ERR_PARSE);
    CHECK(std::string(mcot_last_error()) == "unknown backend kind: quantum");

    json no_file = {{"backend", {{"kind", "replay"}}}};
    CHECK(make_engine(no_file, engine) == MCOT_ERR_PARSE);
    CHECK(std::string(mcot_last_error()) == "replay backend requires replay_file");

    json missing_file = {{"backend", {{"kind", "replay"}, {"replay_file", "/nonexistent"}}}};
    CHECK(make_engine(missing_file, engine) == MCOT_ERR_IO);
    CHECK(std::string(mcot_last_error()).find("cannot open replay store") !=
          std::string::npos);

    json bad_run = synthetic_config();
    bad_run["run"]["max_rounds"] = 0;
    CHECK(make_engine(bad_run, engine) == MCOT_ERR_CONTRACT);
    CHECK(std::string(mcot_last_error()) == "max_rounds must be >= 1");
    CHECK(engine.handle == nullptr);
}

TEST_CASE("rationals in configs accept decimal strings") {
    json config = synthetic_config();
    config["run"]["epsilon"] = "0.2";
    config["judge"]["lexical_threshold"] = json{{"num", 1}, {"den", 5}};
    Engine engine;
    REQUIRE(make_engine(config, engine) == MCOT_OK);
    REQUIRE(engine.handle != nullptr);

    json bad = synthetic_config();
    bad["run"]["epsilon"] = "not a number";
    Engine rejected;
    CHECK(make_engine(bad, rejected) == MCOT_ERR_PARSE);
}

TEST_CASE("a synthetic engine runs one task end to end") {
    Engine engine;
    REQUIRE(make_engine(synthetic_config(), engine) == MCOT_OK);

    OwnedString trace_json;
    REQUIRE(mcot_run_task(engine.handle, task_json("c1", "What is 2+2?").c_str(),
                          &trace_json.ptr) == MCOT_OK);
    REQUIRE(trace_json.ptr != nullptr);

    json trace = json::parse(trace_json.str());
    CHECK(trace.at("task_id") == "c1");
    REQUIRE(trace.at("rounds").size() == 2);
    CHECK(trace.at("config_snapshot").at("backend") == "synthetic");
    CHECK(trace.at("config_snapshot").at("category") == "arithmetic");

    // p = 1 marks all four content steps; q = 1 corrects them in round 1
    const json& round0 = trace.at("rounds")[0];
    const json& round1 = trace.at("rounds")[1];
    CHECK(round0.at("chain").at("round") == 0);
    CHECK(round0.at("chain").at("steps").size() == 5);
    CHECK(round0.at("consistency") == json{{"num", 1}, {"den", 4}});
    CHECK(round0.at("delta") == json{{"num", 0}, {"den", 1}});
    CHECK(round1.at("consistency") == json{{"num", 1}, {"den", 1}});
    CHECK(round1.at("delta") == json{{"num", 3}, {"den", 4}});
    CHECK(trace.at("final_answer") == "42");

    // malformed and invalid tasks
    OwnedString unused;
    CHECK(mcot_run_task(engine.handle, "{oops", &unused.ptr) == MCOT_ERR_PARSE);
    CHECK(std::string(mcot_last_error()).find("task:") != std::string::npos);
    CHECK(mcot_run_task(engine.handle,
                        json{{"id", "x"}, {"category", "other"}, {"question", ""}}
                            .dump()
                            .c_str(),
                        &unused.ptr) == MCOT_ERR_VALIDATION);
    CHECK(mcot_run_task(nullptr, "{}", &unused.ptr) == MCOT_ERR_INVALID_ARGUMENT);
}

TEST_CASE("scoring a trace recomputes the metrics") {
    Engine engine;
    REQUIRE(make_engine(synthetic_config(), engine) == MCOT_OK);
    OwnedString trace_json;
    REQUIRE(mcot_run_task(engine.handle, task_json("s1", "Score me?").c_str(),
                          &trace_json.ptr) == MCOT_OK);

    OwnedString metrics_json;
    REQUIRE(mcot_score_trace(nullptr, trace_json.ptr, R"({"strategy":"annotated"})",
                             &metrics_json.ptr) == MCOT_OK);
    json metrics = json::parse(metrics_json.str());
    CHECK(metrics.at("task_id") == "s1");
    CHECK(metrics.at("rounds") == 2);
    CHECK(metrics.at("e_initial") == 4);
    CHECK(metrics.at("e_corrected") == 4);
    CHECK(metrics.at("e_corr_rate") == json{{"num", 100}, {"den", 1}});
    CHECK(metrics.at("c_norm") == json{{"num", 1}, {"den", 1}});
    CHECK(metrics.at("improvement_pct") == json{{"num", 300}, {"den", 1}});
    REQUIRE(metrics.at("deltas").size() == 1);
    CHECK(metrics.at("deltas")[0] == json{{"num", 3}, {"den", 4}});
    CHECK(metrics.at("total_improvement") == json{{"num", 3}, {"den", 4}});
    CHECK(metrics.contains("coherence"));
    CHECK(metrics.at("c_raw") == 4);

    // defaults apply when no judge config is passed
    OwnedString default_metrics;
    CHECK(mcot_score_trace(nullptr, trace_json.ptr, nullptr, &default_metrics.ptr) ==
          MCOT_OK);

    OwnedString unused;
    CHECK(mcot_score_trace(nullptr, trace_json.ptr, R"({"strategy":"model_backed"})",
                           &unused.ptr) == MCOT_ERR_INVALID_ARGUMENT);
    CHECK(std::string(mcot_last_error()) == "model_backed scoring requires an engine");
    CHECK(mcot_score_trace(nullptr, "{broken", nullptr, &unused.ptr) == MCOT_ERR_PARSE);
}

TEST_CASE("corpus runs, resume, and reports through the C API") {
    TempDir dir("mcot_capi_corpus");
    fs::path corpus = dir.path / "corpus.jsonl";
    write_corpus(corpus, {"First question?", "Second question?", "Third question?"});
    fs::path out_dir = dir.path / "out";

    Engine engine;
    REQUIRE(make_engine(synthetic_config(), engine) == MCOT_OK);

    OwnedString summary_json;
    REQUIRE(mcot_run_corpus(engine.handle, corpus.string().c_str(), out_dir.string().c_str(),
                            R"({"parallel":2})", &summary_json.ptr) == MCOT_OK);
    json summary = json::parse(summary_json.str());
    CHECK(summary.at("succeeded") == 3);
    CHECK(summary.at("failed") == 0);
    CHECK(summary.at("cached") == 0);
    REQUIRE(summary.at("results").size() == 3);
    CHECK(summary.at("results")[0].at("status") == "ok");
    CHECK(fs::exists(out_dir / "manifest.json"));

    OwnedString resumed_json;
    REQUIRE(mcot_run_corpus(engine.handle, corpus.string().c_str(), out_dir.string().c_str(),
                            R"({"resume":true})", &resumed_json.ptr) == MCOT_OK);
    CHECK(json::parse(resumed_json.str()).at("cached") == 3);

    // markdown report, judge label pulled from the traces themselves
    OwnedString report;
    REQUIRE(mcot_report(out_dir.string().c_str(), nullptr, &report.ptr) == MCOT_OK);
    CHECK(report.str().find("| Task | CoT | MCoT |") != std::string::npos);
    CHECK(report.str().find("Judge strategy: annotated.") != std::string::npos);

    OwnedString json_report;
    REQUIRE(mcot_report(out_dir.string().c_str(), R"({"format":"json","pooled":true})",
                        &json_report.ptr) == MCOT_OK);
    json doc = json::parse(json_report.str());
    CHECK(doc.at("aggregation") == "pooled");
    CHECK(doc.at("rows").size() == 1);
    CHECK(doc.at("rows")[0].at("category") == "Arithmetic Problem-Solving");
    CHECK(doc.at("rows")[0].at("task_count") == 3);

    // an empty directory has no traces to aggregate
    fs::path empty_dir = dir.path / "empty";
    fs::create_directories(empty_dir);
    OwnedString no_traces;
    CHECK(mcot_report(empty_dir.string().c_str(), nullptr, &no_traces.ptr) ==
          MCOT_ERR_CONTRACT);
    CHECK(std::string(mcot_last_error()).find("no traces found in") != std::string::npos);

    OwnedString bad_options;
    CHECK(mcot_run_corpus(engine.handle, corpus.string().c_str(), out_dir.string().c_str(),
                          "{bad", &bad_options.ptr) == MCOT_ERR_PARSE);
}

TEST_CASE("failures surface as a partial corpus result") {
    TempDir dir("mcot_capi_partial");
    fs::path corpus = dir.path / "corpus.jsonl";
    write_corpus(corpus, {"Unrecorded question?"});
    fs::path replay_file = dir.path / "empty.jsonl";
    std::ofstream(replay_file) << "";  // a valid, empty replay store

    json config = {{"backend", {{"kind", "replay"}, {"replay_file", replay_file.string()}}}};
    Engine engine;
    REQUIRE(make_engine(config, engine) == MCOT_OK);

    OwnedString summary_json;
    CHECK(mcot_run_corpus(engine.handle, corpus.string().c_str(),
                          (dir.path / "out").string().c_str(), nullptr,
                          &summary_json.ptr) == MCOT_ERR_PARTIAL);
    CHECK(std::string(mcot_last_error()) == "1 task(s) failed");
    REQUIRE(summary_json.ptr != nullptr);
    json summary = json::parse(summary_json.str());
    CHECK(summary.at("failed") == 1);
    CHECK(summary.at("results")[0].at("status") == "failed");
    CHECK(summary.at("results")[0].at("error").get<std::string>().rfind("round 0: ", 0) == 0);
}

TEST_CASE("recording a corpus produces a working replay store") {
    TempDir dir("mcot_capi_record");
    fs::path corpus = dir.path / "corpus.jsonl";
    write_corpus(corpus, {"Alpha question?", "Beta question?"});
    fs::path replay_file = dir.path / "recorded.jsonl";

    Engine synthetic;
    REQUIRE(make_engine(synthetic_config(), synthetic) == MCOT_OK);
    OwnedString record_summary;
    REQUIRE(mcot_record_corpus(synthetic.handle, corpus.string().c_str(),
                               replay_file.string().c_str(),
                               &record_summary.ptr) == MCOT_OK);
    json recorded = json::parse(record_summary.str());
    CHECK(recorded.at("succeeded") == 2);
    CHECK(recorded.at("failed") == 0);
    CHECK(recorded.at("recorded_prompts") == 2);  // combined mode: one call per task
    REQUIRE(fs::exists(replay_file));

    // replaying the store reproduces the same rounds
    json replay_config = synthetic_config();
    replay_config["backend"] = {{"kind", "replay"}, {"replay_file", replay_file.string()}};
    replay_config["run"]["error_marker"] = "[[wrong]]";
    Engine replay;
    REQUIRE(make_engine(replay_config, replay) == MCOT_OK);

    OwnedString from_synthetic, from_replay;
    REQUIRE(mcot_run_task(synthetic.handle, task_json("task-0", "Alpha question?").c_str(),
                          &from_synthetic.ptr) == MCOT_OK);
    REQUIRE(mcot_run_task(replay.handle, task_json("task-0", "Alpha question?").c_str(),
                          &from_replay.ptr) == MCOT_OK);
    json a = json::parse(from_synthetic.str());
    json b = json::parse(from_replay.str());
    CHECK(a.at("rounds") == b.at("rounds"));
    CHECK(a.at("final_answer") == b.at("final_answer"));
}

TEST_CASE("parsing free text over the C boundary") {
    OwnedString chain_json;
    REQUIRE(mcot_parse_chain("1. First fact.\n2. Second fact.\n3. Therefore, the answer is "
                             "seven.",
                             &chain_json.ptr) == MCOT_OK);
    json doc = json::parse(chain_json.str());
    REQUIRE(doc.at("chain").at("steps").size() == 3);
    CHECK(doc.at("chain").at("steps")[0].at("text") == "First fact.");
    CHECK(doc.at("chain").at("final_answer") == "seven");
    CHECK(doc.at("warnings").is_array());

    OwnedString unused;
    CHECK(mcot_parse_chain(nullptr, &unused.ptr) == MCOT_ERR_INVALID_ARGUMENT);
    CHECK(mcot_parse_chain("", &unused.ptr) == MCOT_ERR_CONTRACT);
    CHECK(std::string(mcot_last_error()).find("empty") != std::string::npos);
}
