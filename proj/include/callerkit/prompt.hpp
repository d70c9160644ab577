#pragma once

#include "callerkit/errors.hpp"

#include <string>
#include <vector>

namespace callerkit {

// Rendering view of a benchmark task or instance.
struct PromptTask {
    std::string task_id;
    std::string header;
    std::string docstring;            // "" when absent
    std::vector<std::string> callers; // deterministic (path, line) order
};

struct PromptConfig {
    bool caller = false;
    bool nl = false;
    enum Style { Structured, Natural } style = Structured;
    int n_test = 1; // 0 aggregates all callers

    // decode hints carried as metadata only; the kit calls no model
    double top_p = 0.95;
    double temperature = 0.6;
};

// "header", "header+nl", "header+caller", "header+caller+nl"
PromptConfig parse_prompt_config(const std::string& name);
std::string config_name(const PromptConfig& cfg);

// Marker template with empty segments for disabled fields; callers aggregate
// up to n_test in order. Raises MissingCaller when the caller field is
// enabled but the task has none.
std::string render_structured(const PromptTask& task, const PromptConfig& cfg);

// Field-wise equivalent prose prompt: instruction paragraph, optional caller
// block(s), target header block, optional docstring block.
std::string render_natural(const PromptTask& task, const PromptConfig& cfg);

std::string render(const PromptTask& task, const PromptConfig& cfg);

} // namespace callerkit
