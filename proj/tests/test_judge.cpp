#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mcot/backend.hpp"
#include "mcot/errors.hpp"
#include "mcot/judge.hpp"

#include <random>
#include <string>
#include <vector>

using namespace mcot;

namespace {

ReasoningStep step(int index, std::string text, std::optional<bool> gold = std::nullopt) {
    return {index, std::move(text), StepKind::inference, gold};
}

// Scripted backend: replies with a fixed text, remembers the prompt.
class ScriptedBackend : public Backend {
public:
    explicit ScriptedBackend(std::string reply) : reply_(std::move(reply)) {}
    BackendResponse complete(const BackendRequest& request) override {
        last_prompt = request.prompt.text;
        ++calls;
        return {reply_, std::chrono::milliseconds(0), provider_tag()};
    }
    std::string provider_tag() const override { return "scripted"; }

    std::string last_prompt;
    int calls = 0;

private:
    std::string reply_;
};

const std::string kS1 = "France is a country in Europe.";
const std::string kS2 = "The capital of France is well-known as the city of Paris.";
const std::string kS3 = "Therefore, the capital of France is Paris.";

} // namespace

TEST_CASE("strategy names round trip; 'model' is an accepted alias") {
    CHECK(judge_strategy_from_string("lexical") == JudgeStrategy::lexical);
    CHECK(judge_strategy_from_string("annotated") == JudgeStrategy::annotated);
    CHECK(judge_strategy_from_string("model_backed") == JudgeStrategy::model_backed);
    CHECK(judge_strategy_from_string("model") == JudgeStrategy::model_backed);
    CHECK_THROWS_AS(judge_strategy_from_string("vibes"), ParseFailure);
    CHECK(to_string(JudgeStrategy::model_backed) == "model_backed");
}

TEST_CASE("content words are lowercased alphanumerics minus stopwords") {
    auto words = content_words(kS1, {});
    CHECK(words == std::set<std::string>{"france", "country", "europe"});
    words = content_words(kS2, {});
    CHECK(words == std::set<std::string>{"capital", "france", "well", "known", "city", "paris"});
    words = content_words(kS3, {});
    // "therefore" is deliberately not a stopword: it signals the inferential link
    CHECK(words == std::set<std::string>{"therefore", "capital", "france", "paris"});
    CHECK(content_words("The of and!", {}).empty());
    CHECK(content_words("", {}).empty());
    CHECK(content_words("x86-64 ARM", {}) == std::set<std::string>{"x86", "64", "arm"});
}

TEST_CASE("overlap on the worked three-step chain") {
    CHECK(lexical_overlap(kS1, kS2, {}) == Rational(1, 3));
    CHECK(lexical_overlap(kS2, kS3, {}) == Rational(3, 4));
}

TEST_CASE("overlap edge cases") {
    CHECK(lexical_overlap("", "", {}) == Rational(1));
    CHECK(lexical_overlap("the of", "and it", {}) == Rational(1));  // all stopwords
    CHECK(lexical_overlap("", "cat runs", {}) == Rational(0));
    CHECK(lexical_overlap("dog barks", "cat runs", {}) == Rational(0));
    CHECK(lexical_overlap("same words here", "same words here", {}) == Rational(1));
}

TEST_CASE("overlap is symmetric") {
    std::mt19937_64 rng(7);
    const std::vector<std::string> pool = {"alpha", "beta", "gamma", "delta", "epsilon",
                                           "zeta",  "eta",  "theta", "iota",  "kappa"};
    for (int trial = 0; trial < 200; ++trial) {
        std::string a, b;
        for (const std::string& w : pool) {
            if (rng() % 2) a += w + " ";
            if (rng() % 2) b += w + " ";
        }
        CHECK(lexical_overlap(a, b, {}) == lexical_overlap(b, a, {}));
    }
}

TEST_CASE("lexical connection on the worked chain at the default threshold") {
    JudgeConfig cfg;  // lexical, threshold 1/5
    JudgeVerdict v12 = judge_connection(step(1, kS1), step(2, kS2), cfg);
    JudgeVerdict v23 = judge_connection(step(2, kS2), step(3, kS3), cfg);
    CHECK(v12.connected);
    CHECK(v12.confidence == Rational(1, 3));
    CHECK(v23.connected);
    CHECK(v23.confidence == Rational(3, 4));
    CHECK(v12.method == JudgeStrategy::lexical);
}

TEST_CASE("identical text connects at any threshold up to 1; disjoint never above 0") {
    JudgeConfig cfg;
    cfg.lexical_threshold = Rational(1);
    CHECK(judge_connection(step(1, "the raven flies"), step(2, "the raven flies"), cfg).connected);
    cfg.lexical_threshold = Rational(1, 100);
    CHECK(!judge_connection(step(1, "dog barks"), step(2, "cat runs"), cfg).connected);
    cfg.lexical_threshold = Rational(0);
    CHECK(judge_connection(step(1, "dog barks"), step(2, "cat runs"), cfg).connected);
}

TEST_CASE("paraphrase shares 3 of 5 content words: consistent at 0.2, not at 0.7") {
    // {evening, star, bright, planet, venus} vs {morning, star, planet, venus, shining, early}
    ReasoningStep original = step(1, "The evening star is the bright planet Venus.");
    ReasoningStep refined = step(1, "The morning star is the planet Venus, shining early.");
    CHECK(lexical_overlap(original.text, refined.text, {}) == Rational(3, 5));

    JudgeConfig cfg;
    cfg.lexical_threshold = Rational(1, 5);
    CHECK(judge_refinement_consistency(original, refined, cfg).connected);
    cfg.lexical_threshold = Rational(7, 10);
    CHECK(!judge_refinement_consistency(original, refined, cfg).connected);
}

TEST_CASE("lowering the threshold never disconnects a pair") {
    std::mt19937_64 rng(13);
    const std::vector<std::string> pool = {"sun", "moon", "tide", "rock", "tree", "bird"};
    for (int trial = 0; trial < 100; ++trial) {
        std::string a, b;
        for (const std::string& w : pool) {
            if (rng() % 2) a += w + " ";
            if (rng() % 2) b += w + " ";
        }
        JudgeConfig high, low;
        high.lexical_threshold = Rational(static_cast<int>(rng() % 10) + 1, 10);
        low.lexical_threshold = high.lexical_threshold - Rational(1, 10);
        bool at_high = judge_connection(step(1, a), step(2, b), high).connected;
        bool at_low = judge_connection(step(1, a), step(2, b), low).connected;
        if (at_high) CHECK(at_low);
    }
}

TEST_CASE("annotated judging reads the decisive step's label with confidence 1") {
    JudgeConfig cfg;
    cfg.strategy = JudgeStrategy::annotated;
    JudgeVerdict good = judge_connection(step(1, "a", true), step(2, "b", false), cfg);
    CHECK(good.connected);  // only the later step decides
    CHECK(good.confidence == Rational(1));
    CHECK(good.method == JudgeStrategy::annotated);
    CHECK(!judge_connection(step(1, "a", false), step(2, "b", true), cfg).connected);
    CHECK(!judge_refinement_consistency(step(1, "a", false), step(1, "b", true), cfg).connected);
}

TEST_CASE("annotated judging without a label is a MissingAnnotation") {
    JudgeConfig cfg;
    cfg.strategy = JudgeStrategy::annotated;
    CHECK_THROWS_WITH_AS(judge_connection(step(1, "a", false), step(2, "b"), cfg),
                         "step 2 has no gold_is_error label", MissingAnnotation);
}

TEST_CASE("model-backed judging asks a yes/no question and maps the first word hit") {
    JudgeConfig cfg;
    cfg.strategy = JudgeStrategy::model_backed;

    ScriptedBackend yes("Yes, B follows from A.");
    cfg.model = &yes;
    JudgeVerdict v = judge_connection(step(1, kS1), step(2, kS2), cfg);
    CHECK(v.connected);
    CHECK(v.method == JudgeStrategy::model_backed);
    CHECK(yes.last_prompt.find(kS1) != std::string::npos);
    CHECK(yes.last_prompt.find(kS2) != std::string::npos);
    CHECK(yes.last_prompt.find("yes or no") != std::string::npos);

    ScriptedBackend no("No.");
    cfg.model = &no;
    CHECK(!judge_connection(step(1, kS1), step(2, kS2), cfg).connected);

    ScriptedBackend both("no, wait - yes");
    cfg.model = &both;
    CHECK(!judge_connection(step(1, kS1), step(2, kS2), cfg).connected);
}

TEST_CASE("model-backed judging treats non-answers as refusals, not as 'no'") {
    JudgeConfig cfg;
    cfg.strategy = JudgeStrategy::model_backed;
    ScriptedBackend evasive("Unknown; noted for later.");  // contains no whole-word yes/no
    cfg.model = &evasive;
    try {
        judge_connection(step(1, "a"), step(2, "b"), cfg);
        FAIL("expected BackendFailure");
    } catch (const BackendFailure& e) {
        CHECK(e.kind() == BackendFailure::Kind::refusal);
        CHECK(!e.retryable());
    }
    CHECK_THROWS_AS(
        judge_connection(step(1, "a"), step(2, "b"),
                         JudgeConfig{JudgeStrategy::model_backed, Rational(1, 5), {}, nullptr}),
        ContractViolation);
}

TEST_CASE("identify_errors prefers gold labels and falls back to the critique") {
    ChainOfThought gold;
    gold.steps = {step(1, "a", false), step(2, "b", true), step(3, "c", false),
                  step(4, "d", true)};
    CHECK(identify_errors(gold, &gold, nullptr) == std::set<int>{2, 4});

    ChainOfThought clean;
    clean.steps = {step(1, "a", false), step(2, "b", false)};
    CHECK(identify_errors(clean, &clean, nullptr).empty());

    ChainOfThought unlabeled;
    unlabeled.steps = {step(1, "a"), step(2, "b")};
    CHECK_THROWS_WITH_AS(identify_errors(unlabeled, &unlabeled, nullptr),
                         "gold chain carries no gold_is_error labels", MissingAnnotation);

    Critique critique;
    critique.items = {{1, Verdict::confirm, "fine"},
                      {3, Verdict::flag_error, "wrong"},
                      {2, Verdict::suggest_revision, "tweak"}};
    CHECK(identify_errors(unlabeled, nullptr, &critique) == std::set<int>{3});
    CHECK(identify_errors(unlabeled, nullptr, nullptr).empty());
}

TEST_CASE("has_error_labels") {
    ChainOfThought chain;
    chain.steps = {step(1, "a"), step(2, "b")};
    CHECK(!has_error_labels(chain));
    chain.steps[1].gold_is_error = false;
    CHECK(has_error_labels(chain));
}

TEST_CASE("the shipped stopword file mirrors the embedded list") {
    auto from_file = load_stopwords(std::string(MCOT_SOURCE_DIR) + "/data/stopwords_en.txt");
    CHECK(from_file == default_stopwords());
    CHECK(default_stopwords().size() == 54);
    CHECK(default_stopwords().count("therefore") == 0);
    CHECK_THROWS_AS(load_stopwords("/nonexistent/stopwords.txt"), IoFailure);
}

TEST_CASE("custom stopword sets replace the embedded list") {
    std::set<std::string> custom = {"france"};
    auto words = content_words("France is a country", custom);
    // only the custom list applies: "is"/"a" stay, "france" goes
    CHECK(words == std::set<std::string>{"is", "a", "country"});
}
