#pragma once

#include "mcot/chain.hpp"
#include "mcot/errors.hpp"

#include <string>
#include <vector>

namespace mcot {

/// Cue lists driving the text-to-structure heuristics. English defaults are
/// shipped; everything is swappable for other response styles.
struct ParserConfig {
    std::vector<std::string> phase1_headers = {
        "step 1", "initial", "initial cot", "initial reasoning", "initial chain of thought"};
    std::vector<std::string> phase2_headers = {
        "step 2", "review", "refinement", "review and refinement", "critique"};
    std::vector<std::string> conclusion_cues = {
        "therefore", "so", "thus", "hence", "the final answer"};
    std::vector<std::string> critique_cues = {
        "upon reviewing", "i realize", "error", "inconsistenc"};

    static const ParserConfig& defaults();
};

struct ParseReport {
    ChainOfThought chain;
    std::vector<std::string> warnings;
};

/// Result of splitting a two-phase response. phase1_text and phase2_text are
/// the raw spans; their concatenation is exactly the input.
struct MultiplexParse {
    ParseReport initial;
    Critique critique;
    ParseReport refined;
    std::string phase1_text;
    std::string phase2_text;
    std::vector<std::string> warnings;
};

/// Thrown when a response has no review phase. Carries the phase-1 parse so
/// callers can fall back to single-CoT handling.
class PhaseMissing : public Error {
public:
    explicit PhaseMissing(ParseReport initial)
        : Error("response has no review phase"), initial_(std::move(initial)) {}
    const ParseReport& initial() const { return initial_; }

private:
    ParseReport initial_;
};

/// Splits free text into an ordered chain of steps. Strategy priority:
/// explicit numbering ("1.", "Step 1:"), bullet markers ("-", "•", "*"),
/// then sentence boundaries. A trailing step opening with a conclusion cue
/// also populates final_answer.
ParseReport parse_chain(const std::string& text, const ParserConfig& cfg = ParserConfig::defaults());

/// Parses a combined two-phase response: phase 1 as the initial chain,
/// phase 2 as critique notes plus (when present) a full refined chain.
/// When phase 2 restates no chain, refined is the initial chain with its
/// final answer updated from phase 2's conclusion.
MultiplexParse parse_multiplex_response(const std::string& text,
                                        const ParserConfig& cfg = ParserConfig::defaults());

/// Critique notes plus refined chain from a standalone review response
/// (no phase headers required). `prior` supplies the fallback chain and the
/// critique targets.
struct ReviewParse {
    Critique critique;
    ParseReport refined;
    std::vector<std::string> warnings;
};
ReviewParse parse_review_response(const std::string& text, const ChainOfThought& prior,
                                  const ParserConfig& cfg = ParserConfig::defaults());

/// Canonical rendering: "1. text" lines in order. Reparsing the result
/// preserves step count and text.
std::string render_chain(const ChainOfThought& chain);

} // namespace mcot
