#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mcot/errors.hpp"
#include "mcot/http_backend.hpp"
#include "mcot/parser.hpp"
#include "mcot/replay_backend.hpp"
#include "mcot/sha256.hpp"
#include "mcot/synthetic.hpp"
#include "oracles.hpp"

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

using namespace mcot;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

BackendRequest request_for(std::string text, PromptPhase phase = PromptPhase::initial) {
    BackendRequest request;
    request.prompt.text = std::move(text);
    request.prompt.phase = phase;
    return request;
}

class ScriptedBackend : public Backend {
public:
    explicit ScriptedBackend(std::string reply) : reply_(std::move(reply)) {}
    BackendResponse complete(const BackendRequest&) override {
        ++calls;
        return {reply_, std::chrono::milliseconds(0), provider_tag()};
    }
    std::string provider_tag() const override { return "scripted"; }
    int calls = 0;

private:
    std::string reply_;
};

} // namespace

TEST_CASE("sha256 known answers") {
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("The quick brown fox jumps over the lazy dog") ==
          "d7a8fbb307d7809469ca9abcb0082e4f8d5651e46d3cdb762d02d0bf37c9e592");
    std::string long_input(1000, 'a');
    CHECK(sha256_hex(long_input) == sha256_hex(long_input));
    CHECK(sha256_hex("a") != sha256_hex("b"));
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(splitmix64(0) != splitmix64(1));
}

TEST_CASE("replay store: record, lookup, persist, reload") {
    ReplayStore store;
    store.record("what is 2+2?", "the answer is 4");
    store.record("what is 3+3?", "the answer is 6");
    CHECK(store.size() == 2);
    REQUIRE(store.lookup("what is 2+2?").has_value());
    CHECK(*store.lookup("what is 2+2?") == "the answer is 4");
    CHECK(!store.lookup("what is 9+9?").has_value());

    std::string path = temp_path("mcot_test_store.jsonl");
    store.save(path);
    ReplayStore back = ReplayStore::load(path);
    CHECK(back.size() == 2);
    CHECK(*back.lookup("what is 3+3?") == "the answer is 6");
    CHECK(back.warnings().empty());

    // file format: one JSON object per line with the four fields
    std::ifstream in(path);
    std::string line;
    REQUIRE(std::getline(in, line));
    auto doc = nlohmann::json::parse(line);
    CHECK(doc["prompt_sha256"] == sha256_hex(doc["prompt"].get<std::string>()));
    CHECK(doc["recorded_at"].get<std::string>().find('T') != std::string::npos);
    std::remove(path.c_str());
}

TEST_CASE("replay store: re-recording warns and keeps the latest response") {
    ReplayStore store;
    store.record("p", "first");
    store.record("p", "second");
    CHECK(store.size() == 1);
    CHECK(*store.lookup("p") == "second");
    REQUIRE(store.warnings().size() == 1);
    CHECK(store.warnings()[0].find("latest response wins") != std::string::npos);
    CHECK(store.warnings()[0].find(sha256_hex("p")) != std::string::npos);
}

TEST_CASE("replay store: prompts differing by one byte are independent") {
    ReplayStore store;
    store.record("prompt A", "alpha");
    store.record("prompt B", "beta");
    CHECK(store.size() == 2);
    CHECK(*store.lookup("prompt A") == "alpha");
    CHECK(*store.lookup("prompt B") == "beta");
}

TEST_CASE("replay store: tampered files are rejected with the line number") {
    std::string path = temp_path("mcot_test_tampered.jsonl");
    {
        ReplayStore store;
        store.record("p", "r");
        store.save(path);
        std::ifstream in(path);
        std::string line;
        std::getline(in, line);
        in.close();
        auto doc = nlohmann::json::parse(line);
        doc["prompt"] = "edited prompt";  // hash no longer matches
        std::ofstream out(path, std::ios::trunc);
        out << doc.dump() << "\n";
    }
    try {
        ReplayStore::load(path);
        FAIL("expected ParseFailure");
    } catch (const ParseFailure& e) {
        CHECK(std::string(e.what()).find("line 1") != std::string::npos);
        CHECK(std::string(e.what()).find("prompt_sha256 does not match prompt") !=
              std::string::npos);
    }
    std::remove(path.c_str());
    CHECK_THROWS_AS(ReplayStore::load("/nonexistent/store.jsonl"), IoFailure);
}

TEST_CASE("replay store: duplicate lines load latest-wins with a warning") {
    std::string path = temp_path("mcot_test_dup.jsonl");
    {
        nlohmann::ordered_json doc;
        doc["prompt_sha256"] = sha256_hex("p");
        doc["prompt"] = "p";
        doc["response"] = "old";
        doc["recorded_at"] = "2026-01-01T00:00:00Z";
        std::ofstream out(path, std::ios::trunc);
        out << doc.dump() << "\n";
        doc["response"] = "new";
        out << doc.dump() << "\n";
    }
    ReplayStore store = ReplayStore::load(path);
    CHECK(store.size() == 1);
    CHECK(*store.lookup("p") == "new");
    REQUIRE(store.warnings().size() == 1);
    CHECK(store.warnings()[0].find("line 2") != std::string::npos);
    CHECK(store.warnings()[0].find("latest entry wins") != std::string::npos);
    std::remove(path.c_str());
}

TEST_CASE("replay backend serves recordings and names missing hashes") {
    ReplayStore store;
    store.record("known prompt", "known answer");
    ReplayBackend backend(std::move(store));
    CHECK(backend.provider_tag() == "replay");

    BackendResponse response = backend.complete(request_for("known prompt"));
    CHECK(response.text == "known answer");

    try {
        backend.complete(request_for("unknown prompt"));
        FAIL("expected BackendFailure");
    } catch (const BackendFailure& e) {
        CHECK(e.kind() == BackendFailure::Kind::missing_recording);
        CHECK(!e.retryable());
        CHECK(std::string(e.what()).find(sha256_hex("unknown prompt")) != std::string::npos);
    }
}

TEST_CASE("recording backend captures the inner backend's completions") {
    ScriptedBackend inner("scripted reply");
    ReplayStore store;
    RecordingBackend recorder(inner, store);
    CHECK(recorder.provider_tag() == "scripted");

    BackendResponse response = recorder.complete(request_for("a new prompt"));
    CHECK(response.text == "scripted reply");
    CHECK(store.size() == 1);
    CHECK(*store.lookup("a new prompt") == "scripted reply");

    // replaying the store now answers without the inner backend
    ReplayBackend replay(std::move(store));
    CHECK(replay.complete(request_for("a new prompt")).text == "scripted reply");
    CHECK(inner.calls == 1);
}

TEST_CASE("synthetic config validation") {
    SyntheticConfig bad;
    bad.error_rate = 1.5;
    CHECK_THROWS_AS(validate_synthetic_config(bad), ContractViolation);
    bad = {};
    bad.correction_prob = -0.1;
    CHECK_THROWS_AS(validate_synthetic_config(bad), ContractViolation);
    bad = {};
    bad.steps_per_chain = 0;
    CHECK_THROWS_AS(validate_synthetic_config(bad), ContractViolation);
}

TEST_CASE("synthetic task tag is 8 hex digits of the question hash") {
    std::string tag = synthetic_task_tag("What is 2+2?");
    CHECK(tag == "problem " + sha256_hex("What is 2+2?").substr(0, 8));
    CHECK(tag == synthetic_task_tag("What is 2+2?"));
    CHECK(tag != synthetic_task_tag("What is 3+3?"));
}

TEST_CASE("synthetic generation: degenerate probabilities") {
    Task task;
    task.id = "t";
    task.question = "Q?";

    SyntheticConfig cfg;
    cfg.error_rate = 0.0;
    cfg.steps_per_chain = 10;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        cfg.rng_seed = seed;
        CHECK(count_markers(synthetic_generate(task, cfg)) == 0);
    }

    cfg.error_rate = 1.0;
    cfg.steps_per_chain = 5;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        cfg.rng_seed = seed;
        CHECK(count_markers(synthetic_generate(task, cfg)) == 5);
    }
}

TEST_CASE("synthetic generation parses as a chain and embeds the tag") {
    Task task;
    task.id = "t";
    task.question = "How many moons does Mars have?";
    SyntheticConfig cfg;
    cfg.rng_seed = 9;
    std::string text = synthetic_generate(task, cfg);
    CHECK(text == synthetic_generate(task, cfg));  // deterministic

    ParseReport report = parse_chain(text);
    CHECK(report.chain.n() == 11);  // 10 content steps + conclusion
    std::string tag = synthetic_task_tag(task.question);
    for (const ReasoningStep& step : report.chain.steps) {
        CHECK(step.text.find(tag) != std::string::npos);
    }
    CHECK(!report.chain.final_answer.empty());
}

TEST_CASE("synthetic generation: mean wrong-step count converges to p*n") {
    Task task;
    task.id = "t";
    task.question = "Q?";
    SyntheticConfig cfg;
    cfg.error_rate = 0.3;
    cfg.steps_per_chain = 10;
    oracle::RunningStats stats;
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
        cfg.rng_seed = seed;
        stats.add(count_markers(synthetic_generate(task, cfg)));
    }
    CHECK(stats.mean() == doctest::Approx(3.0).epsilon(0.034));  // 3.0 +- 0.1
}

TEST_CASE("synthetic review: q = 1 corrects everything, q = 0 corrects nothing") {
    Task task;
    task.id = "t";
    task.question = "Q?";
    SyntheticConfig cfg;
    cfg.error_rate = 1.0;
    cfg.steps_per_chain = 6;
    cfg.rng_seed = 4;
    std::string chain = synthetic_generate(task, cfg);
    REQUIRE(count_markers(chain) == 6);

    SyntheticConfig all = cfg;
    all.correction_prob = 1.0;
    std::string corrected = synthetic_review(chain, all, 1);
    CHECK(count_markers(corrected) == 0);
    for (int i = 1; i <= 6; ++i) {
        CHECK(corrected.find("step " + std::to_string(i) + " contains an error") !=
              std::string::npos);
    }
    CHECK(corrected.find("final answer is 42") != std::string::npos);

    SyntheticConfig none = cfg;
    none.correction_prob = 0.0;
    std::string untouched = synthetic_review(chain, none, 1);
    CHECK(count_markers(untouched) == 6);
    CHECK(untouched.find("no issues were found") != std::string::npos);
    CHECK(untouched.find("final answer is unknown") != std::string::npos);
}

TEST_CASE("synthetic review parses as critique notes plus a full refined chain") {
    Task task;
    task.id = "t";
    task.question = "Q?";
    SyntheticConfig cfg;
    cfg.error_rate = 1.0;
    cfg.correction_prob = 1.0;
    cfg.steps_per_chain = 4;
    std::string chain_text = synthetic_generate(task, cfg);
    ChainOfThought prior = parse_chain(chain_text).chain;

    ReviewParse parsed = parse_review_response(synthetic_review(chain_text, cfg, 1), prior);
    CHECK(parsed.critique.items.size() == 4);
    for (const CritiqueItem& item : parsed.critique.items) {
        CHECK(item.verdict == Verdict::flag_error);
    }
    REQUIRE(parsed.refined.chain.n() == 5);
    CHECK(parsed.refined.chain.final_answer == "42");
    CHECK(count_markers(render_chain(parsed.refined.chain)) == 0);
}

TEST_CASE("synthetic review: mean corrected count converges to q times the wrong count") {
    Task task;
    task.id = "t";
    task.question = "Q?";
    SyntheticConfig cfg;
    cfg.error_rate = 1.0;  // exactly 8 wrong steps
    cfg.steps_per_chain = 8;
    cfg.correction_prob = 0.5;
    oracle::RunningStats stats;
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
        cfg.rng_seed = seed;
        std::string chain = synthetic_generate(task, cfg);
        std::string refined = synthetic_review(chain, cfg, 1);
        stats.add(8 - count_markers(refined));
    }
    CHECK(stats.mean() == doctest::Approx(4.0).epsilon(0.0375));  // 4.0 +- 0.15
}

TEST_CASE("synthetic review is deterministic per round and varies across rounds") {
    SyntheticConfig cfg;
    cfg.error_rate = 1.0;
    cfg.correction_prob = 0.5;
    cfg.steps_per_chain = 8;
    cfg.rng_seed = 21;
    Task task;
    task.id = "t";
    bool any_difference = false;
    for (int variant = 0; variant < 20; ++variant) {
        task.question = "Q" + std::to_string(variant) + "?";
        std::string chain = synthetic_generate(task, cfg);
        CHECK(synthetic_review(chain, cfg, 1) == synthetic_review(chain, cfg, 1));
        if (synthetic_review(chain, cfg, 1) != synthetic_review(chain, cfg, 2)) {
            any_difference = true;
        }
    }
    CHECK(any_difference);
    CHECK_THROWS_AS(synthetic_review("no tag in this text", cfg, 1), ParseFailure);
}

TEST_CASE("synthetic backend: phases and per-task round bookkeeping") {
    SyntheticConfig cfg;
    cfg.error_rate = 1.0;
    cfg.correction_prob = 0.5;
    cfg.steps_per_chain = 6;
    cfg.rng_seed = 3;
    SyntheticBackend backend(cfg);
    CHECK(backend.provider_tag() == "synthetic");

    std::string question = "Which gate closes first?";
    std::string prompt = "Please solve the following problem: " + question + "\nThink step by step.";

    BackendResponse initial = backend.complete(request_for(prompt, PromptPhase::initial));
    std::string tag = synthetic_task_tag(question);
    CHECK(initial.text.find(tag) != std::string::npos);

    // first review after an initial call replays round 1 deterministically
    BackendResponse review1 =
        backend.complete(request_for(initial.text, PromptPhase::review));
    CHECK(review1.text == synthetic_review(initial.text, cfg, 1));
    BackendResponse review2 =
        backend.complete(request_for(review1.text, PromptPhase::review));
    CHECK(review2.text == synthetic_review(review1.text, cfg, 2));

    // combined responses carry both phase headers and match review round 1
    BackendResponse combined = backend.complete(request_for(prompt, PromptPhase::combined));
    CHECK(combined.text.find("Step 1 (Initial CoT):") == 0);
    CHECK(combined.text.find("Step 2 (Review and Refinement):") != std::string::npos);
    MultiplexParse parsed = parse_multiplex_response(combined.text);
    CHECK(parsed.initial.chain.n() == 7);
    CHECK(parsed.refined.chain.n() == 7);

    // a review prompt with no tag is refused
    CHECK_THROWS_AS(backend.complete(request_for("tagless text", PromptPhase::review)),
                    BackendFailure);
}

TEST_CASE("http backend: request shape, auth header, and path prefix") {
    httplib::Server server;
    nlohmann::json seen_body;
    std::string seen_auth;
    std::string seen_path;
    server.Post("/api/v1/chat/completions", [&](const httplib::Request& req,
                                                httplib::Response& res) {
        seen_body = nlohmann::json::parse(req.body);
        seen_auth = req.get_header_value("Authorization");
        seen_path = req.path;
        res.set_content(R"({"choices":[{"message":{"content":"pong"}}]})", "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpBackendConfig cfg;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port) + "/api";
    cfg.api_key = "sk-test";
    cfg.model = "test-model";
    HttpBackend backend(cfg);
    CHECK(backend.provider_tag() == "http:test-model");

    BackendRequest request = request_for("ping", PromptPhase::initial);
    request.temperature = Rational(1, 2);
    request.max_output_tokens = 77;
    BackendResponse response = backend.complete(request);
    CHECK(response.text == "pong");

    CHECK(seen_path == "/api/v1/chat/completions");
    CHECK(seen_auth == "Bearer sk-test");
    CHECK(seen_body["model"] == "test-model");
    CHECK(seen_body["messages"][0]["role"] == "user");
    CHECK(seen_body["messages"][0]["content"] == "ping");
    CHECK(seen_body["temperature"] == doctest::Approx(0.5));
    CHECK(seen_body["max_tokens"] == 77);

    server.stop();
    thread.join();
}

TEST_CASE("http backend: retries retryable statuses, then succeeds") {
    httplib::Server server;
    std::atomic<int> hits{0};
    server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        if (++hits <= 2) {
            res.status = 500;
            res.set_content("busy", "text/plain");
        } else {
            res.set_content(R"({"choices":[{"message":{"content":"finally"}}]})",
                            "application/json");
        }
    });
    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpBackendConfig cfg;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
    cfg.max_retries = 2;
    cfg.initial_backoff = std::chrono::milliseconds(5);
    HttpBackend backend(cfg);
    CHECK(backend.complete(request_for("p")).text == "finally");
    CHECK(hits == 3);

    server.stop();
    thread.join();
}

TEST_CASE("http backend: exhausted retries and non-retryable failures") {
    httplib::Server server;
    std::atomic<int> hits{0};
    std::atomic<int> status{500};
    server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = status.load();
        res.set_content("nope", "text/plain");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpBackendConfig cfg;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
    cfg.max_retries = 2;
    cfg.initial_backoff = std::chrono::milliseconds(1);
    HttpBackend backend(cfg);

    try {
        backend.complete(request_for("p"));
        FAIL("expected BackendFailure");
    } catch (const BackendFailure& e) {
        CHECK(e.kind() == BackendFailure::Kind::transport);
        CHECK(std::string(e.what()).find("500") != std::string::npos);
    }
    CHECK(hits == 3);  // initial try + 2 retries

    hits = 0;
    status = 401;  // refusal: no retry
    try {
        backend.complete(request_for("p"));
        FAIL("expected BackendFailure");
    } catch (const BackendFailure& e) {
        CHECK(e.kind() == BackendFailure::Kind::refusal);
        CHECK(!e.retryable());
    }
    CHECK(hits == 1);

    server.stop();
    thread.join();
}

TEST_CASE("http backend: malformed success bodies do not retry") {
    httplib::Server server;
    std::atomic<int> hits{0};
    server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.set_content(R"({"unexpected": true})", "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpBackendConfig cfg;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
    cfg.max_retries = 2;
    HttpBackend backend(cfg);
    CHECK_THROWS_WITH_AS(backend.complete(request_for("p")),
                         "http backend: response lacks choices[0].message.content",
                         BackendFailure);
    CHECK(hits == 1);

    server.stop();
    thread.join();
}

TEST_CASE("http backend: concurrent callers are capped at the in-flight limit") {
    httplib::Server server;
    std::atomic<int> active{0};
    std::atomic<int> high_water{0};
    server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        int now = ++active;
        int seen = high_water.load();
        while (now > seen && !high_water.compare_exchange_weak(seen, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
        --active;
        res.set_content(R"({"choices":[{"message":{"content":"ok"}}]})", "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpBackendConfig cfg;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
    cfg.in_flight_limit = 2;
    HttpBackend backend(cfg);
    CHECK(backend.in_flight_limit() == 2);

    std::vector<std::thread> callers;
    for (int i = 0; i < 6; ++i) {
        callers.emplace_back([&] { backend.complete(request_for("p")); });
    }
    for (std::thread& t : callers) t.join();
    CHECK(high_water.load() <= 2);
    CHECK(high_water.load() >= 1);

    server.stop();
    thread.join();
}

TEST_CASE("http backend: missing base URL is a configuration error") {
    HttpBackendConfig cfg;
    cfg.base_url = "";
    // only when the environment provides no fallback
    if (std::getenv("MCOT_API_BASE") == nullptr) {
        CHECK_THROWS_AS(HttpBackend{cfg}, ContractViolation);
    }
    HttpBackendConfig bad;
    bad.base_url = "http://localhost:1";
    bad.in_flight_limit = 0;
    CHECK_THROWS_AS(HttpBackend{bad}, ContractViolation);
}

TEST_CASE("request validation") {
    BackendRequest request = request_for("ok");
    CHECK_NOTHROW(validate_request(request));
    request.prompt.text.clear();
    CHECK_THROWS_AS(validate_request(request), ContractViolation);
    request = request_for("ok");
    request.max_output_tokens = 0;
    CHECK_THROWS_AS(validate_request(request), ContractViolation);
    request = request_for("ok");
    request.timeout = std::chrono::milliseconds(0);
    CHECK_THROWS_AS(validate_request(request), ContractViolation);
}
