#pragma once

#include "mcot/backend.hpp"

#include <string>
#include <utility>
#include <vector>

namespace mcot {

// Embedded defaults; prompts/*.txt ship the same text.
struct PromptTemplates {
    std::string combined;  // {{question}}
    std::string initial;   // {{question}}
    std::string review;    // {{question}}, {{chain}}

    static const PromptTemplates& defaults();
};

// Reads a template file; a single trailing newline is stripped so files can
// stay newline-terminated without leaking the newline into prompts.
std::string load_template(const std::string& path);

// Replaces each {{name}} placeholder; unknown placeholders are an error.
std::string instantiate_template(
    const std::string& tmpl,
    const std::vector<std::pair<std::string, std::string>>& values);

} // namespace mcot
