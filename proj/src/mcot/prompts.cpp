#include "mcot/prompts.hpp"

#include "mcot/errors.hpp"

#include <fstream>
#include <sstream>

namespace mcot {

namespace {

const char* kCombined =
    "Please solve the following problem: {{question}}\n"
    "First, generate a Chain of Thought for how you would arrive at the answer. "
    "Then, review your answer and critique it. If you find any inconsistencies "
    "or errors, correct them and provide the final answer.";

const char* kInitial =
    "Please solve the following problem: {{question}}\n"
    "Generate a Chain of Thought for how you would arrive at the answer, as a "
    "numbered list of reasoning steps, and state the final answer.";

const char* kReview =
    "The problem was: {{question}}\n"
    "Here is the reasoning so far:\n"
    "{{chain}}\n"
    "Review this Chain of Thought, identifying any potential flaws or "
    "inconsistencies. If you find errors, correct them. Then restate the "
    "corrected Chain of Thought as a numbered list and provide the final answer.";

} // namespace

const PromptTemplates& PromptTemplates::defaults() {
    static const PromptTemplates templates{kCombined, kInitial, kReview};
    return templates;
}

std::string load_template(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoFailure("cannot open prompt template: " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    std::string text = buffer.str();
    if (!text.empty() && text.back() == '\n') text.pop_back();
    return text;
}

std::string instantiate_template(
    const std::string& tmpl,
    const std::vector<std::pair<std::string, std::string>>& values) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        std::size_t open = tmpl.find("{{", pos);
        if (open == std::string::npos) {
            out.append(tmpl, pos, std::string::npos);
            break;
        }
        out.append(tmpl, pos, open - pos);
        std::size_t close = tmpl.find("}}", open + 2);
        if (close == std::string::npos) {
            throw ParseFailure("unclosed placeholder in template", open);
        }
        std::string name = tmpl.substr(open + 2, close - open - 2);
        bool found = false;
        for (const auto& [key, value] : values) {
            if (key == name) {
                out += value;
                found = true;
                break;
            }
        }
        if (!found) {
            throw ParseFailure("unknown placeholder {{" + name + "}}", open);
        }
        pos = close + 2;
    }
    return out;
}

} // namespace mcot
