#include "mcot/synthetic.hpp"

#include "mcot/errors.hpp"
#include "mcot/sha256.hpp"

#include <algorithm>
#include <cctype>
#include <random>
#include <sstream>
#include <vector>

namespace mcot {

namespace {

bool is_hex(char c) {
    return std::isxdigit(static_cast<unsigned char>(c)) != 0;
}

std::mt19937_64 seeded_rng(std::uint64_t seed, const std::string& tag, int round_index) {
    std::uint64_t mixed = splitmix64(seed ^ splitmix64(fnv1a64(tag)));
    mixed = splitmix64(mixed ^ (static_cast<std::uint64_t>(round_index) * 0x9e3779b97f4a7c15ull));
    return std::mt19937_64(mixed);
}

// "problem <hex8>" if present anywhere in the text
std::string extract_tag(const std::string& text) {
    const std::string cue = "problem ";
    std::size_t pos = 0;
    while ((pos = text.find(cue, pos)) != std::string::npos) {
        std::size_t start = pos + cue.size();
        if (start + 8 <= text.size()) {
            bool all_hex = true;
            for (std::size_t i = 0; i < 8; ++i) {
                if (!is_hex(text[start + i])) {
                    all_hex = false;
                    break;
                }
            }
            if (all_hex) return "problem " + text.substr(start, 8);
        }
        pos = start;
    }
    return {};
}

std::string content_step_text(const std::string& tag, int rule, bool wrong) {
    std::string text = "Given " + tag + ", applying rule " + std::to_string(rule) +
                       " yields quantity " + std::to_string(rule);
    if (wrong) {
        text += " ";
        text += kSyntheticErrorMarker;
    }
    text += ".";
    return text;
}

std::string conclusion_text(const std::string& tag, bool clean) {
    return "Therefore, for " + tag + " the final answer is " +
           (clean ? "42" : "unknown") + ".";
}

std::string render_numbered(const std::vector<std::string>& texts) {
    std::string out;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (!out.empty()) out += '\n';
        out += std::to_string(i + 1) + ". " + texts[i];
    }
    return out;
}

struct ReviewOutcome {
    std::vector<std::string> notes;
    std::vector<std::string> refined;  // without numbering
};

ReviewOutcome review_chain(const std::string& chain_text, const SyntheticConfig& cfg,
                           int round_index, const std::string& tag) {
    // step lines are the numbered lines carrying the task tag
    std::vector<std::string> steps;
    std::string conclusion;
    std::istringstream lines(chain_text);
    std::string line;
    while (std::getline(lines, line)) {
        if (line.find(tag) == std::string::npos) continue;
        std::size_t dot = line.find(". ");
        std::size_t digits = 0;
        while (digits < line.size() && std::isdigit(static_cast<unsigned char>(line[digits]))) {
            ++digits;
        }
        if (dot == std::string::npos || digits == 0 || dot != digits) continue;
        std::string text = line.substr(dot + 2);
        if (text.find("final answer") != std::string::npos) {
            conclusion = text;
        } else {
            steps.push_back(text);
        }
    }
    if (steps.empty() && conclusion.empty()) {
        throw ParseFailure("synthetic review: no synthetic step lines in input");
    }

    std::mt19937_64 rng = seeded_rng(cfg.rng_seed, tag, round_index);
    std::bernoulli_distribution corrects(cfg.correction_prob);

    ReviewOutcome out;
    std::string marked = std::string(" ") + kSyntheticErrorMarker;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        std::string text = steps[i];
        std::size_t mark = text.find(marked);
        if (mark != std::string::npos && corrects(rng)) {
            text.erase(mark, marked.size());
            out.notes.push_back("- Upon reviewing the reasoning, step " +
                                std::to_string(i + 1) +
                                " contains an error; it has been corrected below.");
        }
        out.refined.push_back(std::move(text));
    }
    if (out.notes.empty()) {
        out.notes.push_back(
            "- Upon reviewing the reasoning, no issues were found; the reasoning is sound.");
    }
    bool clean = std::all_of(out.refined.begin(), out.refined.end(),
                             [&](const std::string& text) {
                                 return text.find(kSyntheticErrorMarker) == std::string::npos;
                             });
    out.refined.push_back(conclusion_text(tag, clean));
    return out;
}

std::string question_from_prompt(const std::string& prompt) {
    const std::string cue = "problem: ";
    std::size_t pos = prompt.find(cue);
    if (pos == std::string::npos) return prompt;
    std::size_t start = pos + cue.size();
    std::size_t end = prompt.find('\n', start);
    if (end == std::string::npos) end = prompt.size();
    return prompt.substr(start, end - start);
}

} // namespace

void validate_synthetic_config(const SyntheticConfig& cfg) {
    if (cfg.error_rate < 0.0 || cfg.error_rate > 1.0) {
        throw ContractViolation("synthetic error_rate must be in [0,1]");
    }
    if (cfg.correction_prob < 0.0 || cfg.correction_prob > 1.0) {
        throw ContractViolation("synthetic correction_prob must be in [0,1]");
    }
    if (cfg.steps_per_chain < 1) {
        throw ContractViolation("synthetic steps_per_chain must be positive");
    }
}

std::string synthetic_task_tag(const std::string& question) {
    return "problem " + sha256_hex(question).substr(0, 8);
}

std::string synthetic_generate(const Task& task, const SyntheticConfig& cfg) {
    validate_synthetic_config(cfg);
    std::string tag = synthetic_task_tag(task.question);
    std::mt19937_64 rng = seeded_rng(cfg.rng_seed, tag, 0);
    std::bernoulli_distribution wrong(cfg.error_rate);

    std::vector<std::string> texts;
    bool any_wrong = false;
    for (int i = 1; i <= cfg.steps_per_chain; ++i) {
        bool is_wrong = wrong(rng);
        any_wrong = any_wrong || is_wrong;
        texts.push_back(content_step_text(tag, i, is_wrong));
    }
    texts.push_back(conclusion_text(tag, !any_wrong));
    return render_numbered(texts);
}

std::string synthetic_review(const std::string& chain_text, const SyntheticConfig& cfg,
                             int round_index) {
    validate_synthetic_config(cfg);
    std::string tag = extract_tag(chain_text);
    if (tag.empty()) {
        throw ParseFailure("synthetic review: input carries no task tag");
    }
    ReviewOutcome outcome = review_chain(chain_text, cfg, round_index, tag);
    std::string out;
    for (const std::string& note : outcome.notes) {
        out += note;
        out += '\n';
    }
    out += render_numbered(outcome.refined);
    return out;
}

int count_markers(const std::string& text) {
    int count = 0;
    std::size_t pos = 0;
    std::string marker = kSyntheticErrorMarker;
    while ((pos = text.find(marker, pos)) != std::string::npos) {
        ++count;
        pos += marker.size();
    }
    return count;
}

SyntheticBackend::SyntheticBackend(SyntheticConfig cfg) : cfg_(cfg) {
    validate_synthetic_config(cfg_);
}

int SyntheticBackend::next_review_round(const std::string& tag) {
    std::lock_guard<std::mutex> lock(mutex_);
    return ++review_rounds_[tag];
}

BackendResponse SyntheticBackend::complete(const BackendRequest& request) {
    validate_request(request);
    const std::string& prompt = request.prompt.text;

    if (request.prompt.phase == PromptPhase::review) {
        std::string tag = extract_tag(prompt);
        if (tag.empty()) {
            throw BackendFailure(BackendFailure::Kind::refusal,
                                 "synthetic backend: review prompt carries no task tag",
                                 false);
        }
        return {synthetic_review(prompt, cfg_, next_review_round(tag)),
                std::chrono::milliseconds(0), provider_tag()};
    }

    Task task;
    task.id = "prompted";
    task.question = question_from_prompt(prompt);
    std::string chain = synthetic_generate(task, cfg_);
    std::string tag = synthetic_task_tag(task.question);

    if (request.prompt.phase == PromptPhase::initial) {
        std::lock_guard<std::mutex> lock(mutex_);
        review_rounds_[tag] = 0;
        return {chain, std::chrono::milliseconds(0), provider_tag()};
    }

    // combined: both phases in one response
    std::string review = synthetic_review(chain, cfg_, 1);
    {
        std::lock_guard<std::mutex> lock(mutex_);
        review_rounds_[tag] = 1;
    }
    std::string out = "Step 1 (Initial CoT):\n" + chain +
                      "\n\nStep 2 (Review and Refinement):\n" + review;
    return {out, std::chrono::milliseconds(0), provider_tag()};
}

} // namespace mcot
