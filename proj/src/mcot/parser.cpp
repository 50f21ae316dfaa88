#include "mcot/parser.hpp"

#include "mcot/errors.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

namespace mcot {

namespace {

std::string lowercase(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool is_blank(const std::string& s) {
    return trim(s).empty();
}

bool is_alpha(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) != 0;
}

// Substring match where the occurrence may not be glued to letters on either
// side. Used for cues that are complete words.
bool contains_bounded(const std::string& haystack_lower, const std::string& needle_lower) {
    std::size_t pos = 0;
    while ((pos = haystack_lower.find(needle_lower, pos)) != std::string::npos) {
        bool left_ok = pos == 0 || !is_alpha(haystack_lower[pos - 1]);
        std::size_t end = pos + needle_lower.size();
        bool right_ok = end >= haystack_lower.size() || !is_alpha(haystack_lower[end]);
        if (left_ok && right_ok) return true;
        ++pos;
    }
    return false;
}

struct Line {
    std::size_t start = 0;  // byte offset of the line in the input
    std::string raw;
};

std::vector<Line> split_lines(const std::string& text) {
    std::vector<Line> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) {
            if (pos < text.size()) lines.push_back({pos, text.substr(pos)});
            break;
        }
        lines.push_back({pos, text.substr(pos, nl - pos)});
        pos = nl + 1;
    }
    return lines;
}

enum class MarkerStyle { none, num_dot, step_colon, bullet };

struct MarkedLine {
    MarkerStyle style = MarkerStyle::none;
    int label = 0;          // literal number for numbered styles
    std::string content;    // text after the marker, trimmed
};

const std::string kUtf8Bullet = "\xE2\x80\xA2";

MarkedLine classify_line(const std::string& raw) {
    MarkedLine out;
    std::string s = trim(raw);
    out.content = s;
    if (s.empty()) return out;

    // "1." / "23)" followed by whitespace or end of line
    std::size_t i = 0;
    while (i < s.size() && i < 3 && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i > 0 && i < s.size() && (s[i] == '.' || s[i] == ')')) {
        std::size_t after = i + 1;
        if (after == s.size() || std::isspace(static_cast<unsigned char>(s[after]))) {
            out.style = MarkerStyle::num_dot;
            out.label = std::stoi(s.substr(0, i));
            out.content = trim(s.substr(after));
            return out;
        }
    }

    // "Step 3:" / "step 3."
    std::string low = lowercase(s);
    if (low.rfind("step", 0) == 0) {
        std::size_t p = 4;
        while (p < s.size() && std::isspace(static_cast<unsigned char>(s[p]))) ++p;
        std::size_t d = p;
        while (d < s.size() && std::isdigit(static_cast<unsigned char>(s[d]))) ++d;
        if (d > p) {
            std::size_t q = d;
            while (q < s.size() && std::isspace(static_cast<unsigned char>(s[q]))) ++q;
            if (q < s.size() && (s[q] == ':' || s[q] == '.')) {
                out.style = MarkerStyle::step_colon;
                out.label = std::stoi(s.substr(p, d - p));
                out.content = trim(s.substr(q + 1));
                return out;
            }
        }
    }

    // "- " / "* " / "• "
    if ((s[0] == '-' || s[0] == '*') && s.size() > 1 &&
        std::isspace(static_cast<unsigned char>(s[1]))) {
        out.style = MarkerStyle::bullet;
        out.content = trim(s.substr(1));
        return out;
    }
    if (s.rfind(kUtf8Bullet, 0) == 0) {
        std::string rest = s.substr(kUtf8Bullet.size());
        if (!rest.empty() && std::isspace(static_cast<unsigned char>(rest[0]))) {
            out.style = MarkerStyle::bullet;
            out.content = trim(rest);
            return out;
        }
    }
    return out;
}

// A header line is lexicon scaffolding like "Step 2 (Review and Refinement):"
// or "Review:"; it carries no step content of its own.
bool is_header_line(const std::string& raw, const std::vector<std::string>& lexicon) {
    std::string s = trim(raw);
    // strip markdown emphasis and leading list markers
    while (!s.empty() && (s.front() == '*' || s.front() == '#' || s.front() == '-')) s.erase(0, 1);
    while (!s.empty() && s.back() == '*') s.pop_back();
    s = trim(s);
    if (!s.empty() && s.back() == ':') s.pop_back();
    s = trim(s);
    std::string low = lowercase(s);

    std::string base = low;
    std::string paren;
    if (!low.empty() && low.back() == ')') {
        std::size_t open = low.rfind('(');
        if (open != std::string::npos) {
            paren = trim(low.substr(open + 1, low.size() - open - 2));
            base = trim(low.substr(0, open));
        }
    }
    for (const std::string& entry : lexicon) {
        if (base == entry) return true;
        if (base.empty() && paren == entry) return true;
    }
    return false;
}

std::optional<std::string> extract_final_answer(const std::string& step_text,
                                                const ParserConfig& cfg) {
    std::string low = lowercase(step_text);

    auto tail_after = [&](std::size_t pos, std::size_t len) -> std::string {
        std::size_t b = pos + len;
        while (b < step_text.size() &&
               (std::isspace(static_cast<unsigned char>(step_text[b])) || step_text[b] == ':' ||
                step_text[b] == ',' || step_text[b] == ';')) {
            ++b;
        }
        std::size_t e = step_text.size();
        while (e > b && (std::isspace(static_cast<unsigned char>(step_text[e - 1])) ||
                         step_text[e - 1] == '.' || step_text[e - 1] == '!' ||
                         step_text[e - 1] == '?')) {
            --e;
        }
        return step_text.substr(b, e - b);
    };

    for (const char* phrase : {"final answer is", "answer is"}) {
        std::size_t pos = low.find(phrase);
        if (pos != std::string::npos) {
            std::string tail = tail_after(pos, std::string(phrase).size());
            if (!tail.empty()) return tail;
        }
    }
    for (const std::string& cue : cfg.conclusion_cues) {
        if (low.rfind(cue, 0) == 0) {
            std::size_t end = cue.size();
            if (end < low.size() && is_alpha(low[end])) continue;  // "so" vs "solving"
            std::string tail = tail_after(0, end);
            if (!tail.empty()) return tail;
        }
    }
    return std::nullopt;
}

bool starts_with_conclusion_cue(const std::string& step_text, const ParserConfig& cfg) {
    std::string low = lowercase(trim(step_text));
    for (const std::string& cue : cfg.conclusion_cues) {
        if (low.rfind(cue, 0) == 0) {
            if (cue.size() < low.size() && is_alpha(low[cue.size()])) continue;
            return true;
        }
    }
    if (low.find("final answer") != std::string::npos) return true;
    return false;
}

// Sentence boundaries: runs of .!? followed by whitespace or end of text.
std::vector<std::string> split_sentences(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c == '.' || c == '!' || c == '?') {
            std::size_t j = i;
            while (j + 1 < text.size() &&
                   (text[j + 1] == '.' || text[j + 1] == '!' || text[j + 1] == '?')) {
                ++j;
            }
            if (j + 1 >= text.size() || std::isspace(static_cast<unsigned char>(text[j + 1]))) {
                std::string sentence = trim(text.substr(start, j + 1 - start));
                if (!sentence.empty()) out.push_back(sentence);
                start = j + 1;
            }
            i = j + 1;
        } else {
            ++i;
        }
    }
    std::string rest = trim(text.substr(start));
    if (!rest.empty()) {
        out.push_back("");  // sentinel: unterminated fragment, handled by caller
        out.back() = rest;
    }
    return out;
}

bool ends_with_terminal(const std::string& s) {
    std::string t = trim(s);
    return !t.empty() && (t.back() == '.' || t.back() == '!' || t.back() == '?');
}

ChainOfThought finish_chain(std::vector<std::string> step_texts, const ParserConfig& cfg,
                            std::vector<std::string>& warnings) {
    ChainOfThought chain;
    for (std::size_t i = 0; i < step_texts.size(); ++i) {
        ReasoningStep step;
        step.index = static_cast<int>(i) + 1;
        step.text = trim(step_texts[i]);
        step.kind = StepKind::inference;
        chain.steps.push_back(std::move(step));
    }
    chain.round = 0;
    if (!chain.steps.empty()) {
        if (auto answer = extract_final_answer(chain.steps.back().text, cfg)) {
            chain.final_answer = *answer;
        } else {
            warnings.push_back("no conclusion cue found; final_answer left empty");
        }
    }
    return chain;
}

} // namespace

const ParserConfig& ParserConfig::defaults() {
    static const ParserConfig cfg{};
    return cfg;
}

ParseReport parse_chain(const std::string& text, const ParserConfig& cfg) {
    if (trim(text).empty()) {
        throw ContractViolation("parse_chain: text must be non-empty");
    }
    ParseReport report;
    std::vector<Line> lines = split_lines(text);

    std::vector<MarkedLine> marked(lines.size());
    int count_num = 0, count_step = 0, count_bullet = 0;
    MarkerStyle first_numbering = MarkerStyle::none;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        marked[i] = classify_line(lines[i].raw);
        switch (marked[i].style) {
            case MarkerStyle::num_dot:
                ++count_num;
                if (first_numbering == MarkerStyle::none) first_numbering = MarkerStyle::num_dot;
                break;
            case MarkerStyle::step_colon:
                ++count_step;
                if (first_numbering == MarkerStyle::none) first_numbering = MarkerStyle::step_colon;
                break;
            case MarkerStyle::bullet:
                ++count_bullet;
                break;
            default:
                break;
        }
    }

    // strategy priority: numbering, bullets, sentence fallback
    MarkerStyle dominant = MarkerStyle::none;
    if (count_num + count_step > 0) {
        dominant = count_num > count_step   ? MarkerStyle::num_dot
                   : count_step > count_num ? MarkerStyle::step_colon
                                            : first_numbering;
    } else if (count_bullet > 0) {
        dominant = MarkerStyle::bullet;
    }

    if (dominant == MarkerStyle::none) {
        std::vector<std::string> sentences = split_sentences(text);
        if (sentences.empty()) {
            throw ParseFailure("no step boundary found in text", 0);
        }
        if (!ends_with_terminal(text)) {
            if (sentences.size() == 1) {
                throw ParseFailure("no step boundary found and text is under one sentence", 0);
            }
            std::string fragment = sentences.back();
            sentences.pop_back();
            sentences.back() += " " + fragment;
            report.warnings.push_back("unterminated trailing text folded into final step");
        }
        report.chain = finish_chain(std::move(sentences), cfg, report.warnings);
        return report;
    }

    std::vector<std::string> step_texts;
    std::vector<int> labels;
    bool seen_step = false;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string& raw = lines[i].raw;
        if (is_blank(raw)) continue;
        const MarkedLine& m = marked[i];
        if (m.style == dominant) {
            step_texts.push_back(m.content);
            labels.push_back(m.label);
            seen_step = true;
            continue;
        }
        if (!seen_step) {
            if (is_header_line(raw, cfg.phase1_headers) || is_header_line(raw, cfg.phase2_headers)) {
                continue;  // scaffolding like "Step 1 (Initial CoT):"
            }
            step_texts.push_back(trim(raw));
            labels.push_back(0);
            seen_step = true;
            report.warnings.push_back("unmarked leading text treated as a step");
            continue;
        }
        if (m.style != MarkerStyle::none) {
            step_texts.back() += " " + m.content;
            report.warnings.push_back("minority-style line folded into step " +
                                      std::to_string(step_texts.size()));
        } else {
            step_texts.back() += " " + trim(raw);
            report.warnings.push_back("unmarked line folded into step " +
                                      std::to_string(step_texts.size()));
        }
    }

    if (step_texts.empty()) {
        throw ParseFailure("no step boundary found in text", 0);
    }

    if (dominant == MarkerStyle::num_dot || dominant == MarkerStyle::step_colon) {
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] != 0 && labels[i] != static_cast<int>(i) + 1) {
                report.warnings.push_back("step labels were not 1..n; steps renumbered by position");
                break;
            }
        }
    }

    report.chain = finish_chain(std::move(step_texts), cfg, report.warnings);
    return report;
}

namespace {

struct Phase2Item {
    std::string text;
    bool has_marker = false;
};

std::vector<Phase2Item> itemize(const std::vector<Line>& lines) {
    std::vector<Phase2Item> items;
    bool prev_blank = true;
    for (const Line& line : lines) {
        if (is_blank(line.raw)) {
            prev_blank = true;
            continue;
        }
        MarkedLine m = classify_line(line.raw);
        if (m.style != MarkerStyle::none) {
            items.push_back({m.content, true});
        } else if (!items.empty() && !prev_blank) {
            items.back().text += " " + trim(line.raw);
        } else {
            items.push_back({trim(line.raw), false});
        }
        prev_blank = false;
    }
    return items;
}

bool is_critique_note(const std::string& text, const ParserConfig& cfg) {
    std::string low = lowercase(text);
    for (const std::string& cue : cfg.critique_cues) {
        if (low.find(cue) != std::string::npos) return true;
    }
    return false;
}

Verdict classify_verdict(const std::string& note_lower) {
    static const char* confirm_cues[] = {"no error",     "no inconsistenc", "no flaw",
                                         "no issue",     "indeed",          "confirm"};
    static const char* confirm_bounded[] = {"is correct", "looks correct", "sound"};
    static const char* revision_cues[] = {"should be", "instead", "suggest", "revis",
                                          "rephras",   "replace"};
    static const char* flag_cues[] = {"error",   "flaw",    "inconsisten",     "incorrect",
                                      "wrong",   "mistake", "does not follow", "invalid"};
    for (const char* cue : confirm_cues) {
        if (note_lower.find(cue) != std::string::npos) return Verdict::confirm;
    }
    for (const char* cue : confirm_bounded) {
        if (contains_bounded(note_lower, cue)) return Verdict::confirm;
    }
    for (const char* cue : revision_cues) {
        if (note_lower.find(cue) != std::string::npos) return Verdict::suggest_revision;
    }
    for (const char* cue : flag_cues) {
        if (note_lower.find(cue) != std::string::npos) return Verdict::flag_error;
    }
    return Verdict::confirm;
}

std::optional<int> explicit_target(const std::string& note_lower) {
    for (const char* keyword : {"step", "statement", "line"}) {
        std::size_t pos = 0;
        std::string kw = keyword;
        while ((pos = note_lower.find(kw, pos)) != std::string::npos) {
            if (pos > 0 && is_alpha(note_lower[pos - 1])) {
                ++pos;
                continue;
            }
            std::size_t p = pos + kw.size();
            while (p < note_lower.size() &&
                   (std::isspace(static_cast<unsigned char>(note_lower[p])) ||
                    note_lower[p] == '#')) {
                ++p;
            }
            std::size_t d = p;
            while (d < note_lower.size() && std::isdigit(static_cast<unsigned char>(note_lower[d]))) {
                ++d;
            }
            if (d > p) return std::stoi(note_lower.substr(p, d - p));
            ++pos;
        }
    }
    return std::nullopt;
}

struct Phase2Parse {
    Critique critique;
    std::optional<ParseReport> refined_full;
    std::optional<std::string> updated_answer;
    std::vector<std::string> warnings;
};

Phase2Parse parse_phase2_body(const std::string& body, const ChainOfThought& initial,
                              const ParserConfig& cfg) {
    Phase2Parse out;
    std::vector<Line> lines = split_lines(body);
    std::vector<Phase2Item> items = itemize(lines);

    std::vector<std::string> note_texts;
    std::vector<std::string> chain_texts;
    for (const Phase2Item& item : items) {
        if (is_critique_note(item.text, cfg)) {
            note_texts.push_back(item.text);
        } else {
            chain_texts.push_back(item.text);
        }
    }

    // critique items from the notes
    std::vector<bool> taken(static_cast<std::size_t>(initial.n()) + 1, false);
    for (const std::string& note : note_texts) {
        std::string low = lowercase(note);
        int target = initial.steps.empty() ? 1 : initial.steps.back().index;
        if (auto t = explicit_target(low)) {
            if (*t >= 1 && *t <= initial.n()) {
                target = *t;
            } else {
                out.warnings.push_back("critique note names step " + std::to_string(*t) +
                                       " outside the chain; targeting the last step");
            }
        }
        if (taken[static_cast<std::size_t>(target)]) {
            out.warnings.push_back("duplicate critique target " + std::to_string(target) +
                                   " dropped");
            continue;
        }
        taken[static_cast<std::size_t>(target)] = true;
        out.critique.items.push_back({target, classify_verdict(low), note});
    }

    // a refined chain must restate the reasoning, not just conclude it
    bool full_chain = chain_texts.size() >= 2 ||
                      (chain_texts.size() == 1 &&
                       static_cast<int>(chain_texts.size()) == initial.n() &&
                       !starts_with_conclusion_cue(chain_texts.front(), cfg));
    if (full_chain) {
        ParseReport refined;
        refined.chain = finish_chain(chain_texts, cfg, refined.warnings);
        out.refined_full = std::move(refined);
    } else if (!chain_texts.empty()) {
        if (auto answer = extract_final_answer(chain_texts.back(), cfg)) {
            out.updated_answer = *answer;
        } else {
            out.warnings.push_back("phase 2 text outside the critique was not a chain; ignored");
        }
    }
    if (!out.updated_answer && !out.refined_full) {
        // a conclusion occasionally hides inside a critique sentence
        for (auto it = note_texts.rbegin(); it != note_texts.rend(); ++it) {
            std::string low = lowercase(*it);
            if (low.find("answer is") != std::string::npos) {
                if (auto answer = extract_final_answer(*it, cfg)) {
                    out.updated_answer = *answer;
                    break;
                }
            }
        }
    }
    return out;
}

std::size_t find_phase2_header(const std::vector<Line>& lines, const ParserConfig& cfg) {
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (is_header_line(lines[i].raw, cfg.phase2_headers)) return i;
    }
    return lines.size();
}

} // namespace

MultiplexParse parse_multiplex_response(const std::string& text, const ParserConfig& cfg) {
    if (trim(text).empty()) {
        throw ContractViolation("parse_multiplex_response: text must be non-empty");
    }
    std::vector<Line> lines = split_lines(text);
    std::size_t h2 = find_phase2_header(lines, cfg);
    if (h2 == lines.size()) {
        throw PhaseMissing(parse_chain(text, cfg));
    }

    std::size_t split_at = lines[h2].start;
    MultiplexParse out;
    out.phase1_text = text.substr(0, split_at);
    out.phase2_text = text.substr(split_at);

    if (trim(out.phase1_text).empty()) {
        throw ParseFailure("response has a review phase but no initial phase", split_at);
    }
    out.initial = parse_chain(out.phase1_text, cfg);

    // drop the header line itself from the phase-2 body
    std::string body;
    for (std::size_t i = h2 + 1; i < lines.size(); ++i) {
        body += lines[i].raw;
        body += '\n';
    }
    Phase2Parse phase2 = parse_phase2_body(body, out.initial.chain, cfg);
    out.critique = std::move(phase2.critique);
    out.warnings = std::move(phase2.warnings);

    if (phase2.refined_full) {
        out.refined = std::move(*phase2.refined_full);
    } else {
        out.refined.chain = out.initial.chain;
        if (phase2.updated_answer) {
            out.refined.chain.final_answer = *phase2.updated_answer;
        }
    }
    return out;
}

ReviewParse parse_review_response(const std::string& text, const ChainOfThought& prior,
                                  const ParserConfig& cfg) {
    if (trim(text).empty()) {
        throw ContractViolation("parse_review_response: text must be non-empty");
    }
    std::vector<Line> lines = split_lines(text);
    std::string body;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i == 0 && is_header_line(lines[i].raw, cfg.phase2_headers)) continue;
        body += lines[i].raw;
        body += '\n';
    }
    Phase2Parse phase2 = parse_phase2_body(body, prior, cfg);

    ReviewParse out;
    out.critique = std::move(phase2.critique);
    out.warnings = std::move(phase2.warnings);
    if (phase2.refined_full) {
        out.refined = std::move(*phase2.refined_full);
    } else {
        out.refined.chain = prior;
        if (phase2.updated_answer) {
            out.refined.chain.final_answer = *phase2.updated_answer;
        }
    }
    return out;
}

std::string render_chain(const ChainOfThought& chain) {
    std::string out;
    for (const ReasoningStep& step : chain.steps) {
        if (!out.empty()) out += '\n';
        out += std::to_string(step.index);
        out += ". ";
        out += step.text;
    }
    return out;
}

} // namespace mcot
