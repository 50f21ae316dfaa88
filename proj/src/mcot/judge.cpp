#include "mcot/judge.hpp"

#include "mcot/backend.hpp"
#include "mcot/errors.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

namespace mcot {

std::string to_string(JudgeStrategy s) {
    switch (s) {
        case JudgeStrategy::lexical: return "lexical";
        case JudgeStrategy::annotated: return "annotated";
        case JudgeStrategy::model_backed: return "model_backed";
    }
    throw ContractViolation("unknown JudgeStrategy");
}

JudgeStrategy judge_strategy_from_string(const std::string& s) {
    if (s == "lexical") return JudgeStrategy::lexical;
    if (s == "annotated") return JudgeStrategy::annotated;
    if (s == "model_backed" || s == "model") return JudgeStrategy::model_backed;
    throw ParseFailure("unknown judge strategy: " + s);
}

JudgeConfig JudgeConfig::defaults() {
    return JudgeConfig{};
}

const std::set<std::string>& default_stopwords() {
    static const std::set<std::string> words = {
        "a",    "an",   "and",  "are",  "as",    "at",   "be",   "been", "but",
        "by",   "can",  "did",  "do",   "does",  "for",  "from", "had",  "has",
        "have", "he",   "her",  "his",  "i",     "if",   "in",   "into", "is",
        "it",   "its",  "me",   "my",   "no",    "not",  "of",   "on",   "or",
        "our",  "she",  "so",   "that", "the",   "their", "them", "then", "there",
        "they", "this", "to",   "was",  "we",    "were", "will", "with", "you",
    };
    return words;
}

std::set<std::string> load_stopwords(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoFailure("cannot open stopword list: " + path);
    }
    std::set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) {
            line.pop_back();
        }
        std::size_t b = 0;
        while (b < line.size() && std::isspace(static_cast<unsigned char>(line[b]))) ++b;
        if (b < line.size()) words.insert(line.substr(b));
    }
    return words;
}

std::set<std::string> content_words(const std::string& text,
                                    const std::set<std::string>& stopwords) {
    const std::set<std::string>& stop = stopwords.empty() ? default_stopwords() : stopwords;
    std::set<std::string> out;
    std::string token;
    auto flush = [&]() {
        if (!token.empty() && stop.find(token) == stop.end()) out.insert(token);
        token.clear();
    };
    for (char ch : text) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            token.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
        }
    }
    flush();
    return out;
}

Rational lexical_overlap(const std::string& a, const std::string& b,
                         const std::set<std::string>& stopwords) {
    std::set<std::string> wa = content_words(a, stopwords);
    std::set<std::string> wb = content_words(b, stopwords);
    if (wa.empty() && wb.empty()) return Rational(1);
    if (wa.empty() || wb.empty()) return Rational(0);
    std::size_t shared = 0;
    for (const std::string& w : wa) {
        if (wb.count(w)) ++shared;
    }
    std::size_t smaller = std::min(wa.size(), wb.size());
    return Rational(static_cast<std::int64_t>(shared), static_cast<std::int64_t>(smaller));
}

namespace {

JudgeVerdict lexical_verdict(const std::string& a, const std::string& b,
                             const JudgeConfig& cfg) {
    Rational overlap = lexical_overlap(a, b, cfg.stopwords);
    return {!(overlap < cfg.lexical_threshold), overlap, JudgeStrategy::lexical};
}

JudgeVerdict annotated_verdict(const ReasoningStep& decisive) {
    if (!decisive.gold_is_error.has_value()) {
        throw MissingAnnotation("step " + std::to_string(decisive.index) +
                                " has no gold_is_error label");
    }
    return {!*decisive.gold_is_error, Rational(1), JudgeStrategy::annotated};
}

JudgeVerdict model_verdict(const std::string& question, const JudgeConfig& cfg);

JudgeVerdict dispatch(const ReasoningStep& a, const ReasoningStep& b,
                      const ReasoningStep& decisive, const std::string& question,
                      const JudgeConfig& cfg) {
    switch (cfg.strategy) {
        case JudgeStrategy::lexical:
            return lexical_verdict(a.text, b.text, cfg);
        case JudgeStrategy::annotated:
            return annotated_verdict(decisive);
        case JudgeStrategy::model_backed:
            return model_verdict(question, cfg);
    }
    throw ContractViolation("unknown JudgeStrategy");
}

} // namespace

JudgeVerdict judge_connection(const ReasoningStep& a, const ReasoningStep& b,
                              const JudgeConfig& cfg) {
    std::string question =
        "Consider two consecutive reasoning steps.\nStep A: " + a.text +
        "\nStep B: " + b.text +
        "\nIs there a valid logical connection from step A to step B? Answer yes or no.";
    return dispatch(a, b, /*decisive=*/b, question, cfg);
}

JudgeVerdict judge_refinement_consistency(const ReasoningStep& original,
                                          const ReasoningStep& refined,
                                          const JudgeConfig& cfg) {
    std::string question =
        "Consider a reasoning step and its revision.\nOriginal: " + original.text +
        "\nRevised: " + refined.text +
        "\nIs the revised step consistent with the original reasoning? Answer yes or no.";
    return dispatch(original, refined, /*decisive=*/refined, question, cfg);
}

namespace {

JudgeVerdict model_verdict(const std::string& question, const JudgeConfig& cfg) {
    if (cfg.model == nullptr) {
        throw ContractViolation("model_backed judge requires a backend");
    }
    BackendRequest request;
    request.prompt.text = question;
    request.prompt.phase = PromptPhase::review;
    request.temperature = Rational(0);
    request.max_output_tokens = 8;
    BackendResponse response = cfg.model->complete(request);

    std::string low = response.text;
    std::transform(low.begin(), low.end(), low.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    // first whole-word yes/no wins; "know"/"noted" must not read as "no"
    auto find_word = [&](const std::string& word) -> std::size_t {
        std::size_t pos = 0;
        while ((pos = low.find(word, pos)) != std::string::npos) {
            bool left = pos == 0 || !std::isalpha(static_cast<unsigned char>(low[pos - 1]));
            std::size_t end = pos + word.size();
            bool right = end >= low.size() || !std::isalpha(static_cast<unsigned char>(low[end]));
            if (left && right) return pos;
            ++pos;
        }
        return std::string::npos;
    };
    std::size_t yes = find_word("yes");
    std::size_t no = find_word("no");
    if (yes == std::string::npos && no == std::string::npos) {
        throw BackendFailure(BackendFailure::Kind::refusal,
                             "judge backend answered neither yes nor no", false);
    }
    bool connected = yes != std::string::npos && (no == std::string::npos || yes < no);
    return {connected, Rational(1), JudgeStrategy::model_backed};
}

} // namespace

bool has_error_labels(const ChainOfThought& chain) {
    for (const ReasoningStep& step : chain.steps) {
        if (step.gold_is_error.has_value()) return true;
    }
    return false;
}

std::set<int> identify_errors(const ChainOfThought& chain,
                              const ChainOfThought* gold,
                              const Critique* critique) {
    std::set<int> out;
    if (gold != nullptr) {
        if (!has_error_labels(*gold)) {
            throw MissingAnnotation("gold chain carries no gold_is_error labels");
        }
        for (const ReasoningStep& step : gold->steps) {
            if (step.gold_is_error.value_or(false)) out.insert(step.index);
        }
        return out;
    }
    if (critique != nullptr) {
        for (const CritiqueItem& item : critique->items) {
            if (item.verdict == Verdict::flag_error) out.insert(item.target_index);
        }
    }
    (void)chain;
    return out;
}

} // namespace mcot
