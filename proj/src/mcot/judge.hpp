#pragma once

#include "mcot/chain.hpp"
#include "mcot/rational.hpp"

#include <set>
#include <string>
#include <vector>

namespace mcot {

class Backend;

enum class JudgeStrategy { lexical, annotated, model_backed };

std::string to_string(JudgeStrategy s);
JudgeStrategy judge_strategy_from_string(const std::string& s);

struct JudgeVerdict {
    bool connected = false;
    Rational confidence;  // in [0,1]; annotated verdicts always 1
    JudgeStrategy method = JudgeStrategy::lexical;
};

struct JudgeConfig {
    JudgeStrategy strategy = JudgeStrategy::lexical;
    Rational lexical_threshold{1, 5};
    std::set<std::string> stopwords;  // empty means: use the embedded default list
    Backend* model = nullptr;         // required for model_backed

    static JudgeConfig defaults();
};

// The embedded English stopword list; data/stopwords_en.txt mirrors it.
const std::set<std::string>& default_stopwords();

// Newline-delimited word list; blank lines skipped.
std::set<std::string> load_stopwords(const std::string& path);

// Lowercased alphanumeric tokens with stopwords removed.
std::set<std::string> content_words(const std::string& text,
                                    const std::set<std::string>& stopwords);

// Overlap of content-word sets: |A ∩ B| / min(|A|, |B|); 1 when both empty,
// 0 when exactly one is empty.
Rational lexical_overlap(const std::string& a, const std::string& b,
                         const std::set<std::string>& stopwords);

// Is there a logical connection from step a to its successor b?
JudgeVerdict judge_connection(const ReasoningStep& a, const ReasoningStep& b,
                              const JudgeConfig& cfg);

// Is the refined step consistent with the original?
JudgeVerdict judge_refinement_consistency(const ReasoningStep& original,
                                          const ReasoningStep& refined,
                                          const JudgeConfig& cfg);

// Error step indexes: from gold labels when a labeled gold chain is given,
// otherwise from the critique's flag_error verdicts.
std::set<int> identify_errors(const ChainOfThought& chain,
                              const ChainOfThought* gold,
                              const Critique* critique);

bool has_error_labels(const ChainOfThought& chain);

} // namespace mcot
