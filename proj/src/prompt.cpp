#include "callerkit/prompt.hpp"

#include "callerkit/corpus.hpp"

namespace callerkit {

namespace {

constexpr const char* kTaskInstruction =
    "You are an expert Python programmer. You will be given the header of a function, "
    "the body of a function that calls it, and a natural language description explaining "
    "what the code should do. Your task is to implement the function so that it integrates "
    "correctly with the caller and matches the description. The implementation should be "
    "efficient, robust, and handle edge cases. Do not include explanations in your response.";

std::vector<std::string> take_callers(const PromptTask& task, const PromptConfig& cfg) {
    if (!cfg.caller) return {};
    if (task.callers.empty()) throw MissingCaller("task " + task.task_id + " has no caller");
    std::size_t n = cfg.n_test <= 0 ? task.callers.size()
                                    : std::min<std::size_t>(cfg.n_test, task.callers.size());
    return {task.callers.begin(), task.callers.begin() + n};
}

} // namespace

PromptConfig parse_prompt_config(const std::string& name) {
    PromptConfig cfg;
    if (name == "header") return cfg;
    if (name == "header+nl") {
        cfg.nl = true;
        return cfg;
    }
    if (name == "header+caller") {
        cfg.caller = true;
        return cfg;
    }
    if (name == "header+caller+nl") {
        cfg.caller = true;
        cfg.nl = true;
        return cfg;
    }
    throw DomainError("unknown prompt configuration: " + name);
}

std::string config_name(const PromptConfig& cfg) {
    std::string n = "header";
    if (cfg.caller) n += "+caller";
    if (cfg.nl) n += "+nl";
    return n;
}

std::string render_structured(const PromptTask& task, const PromptConfig& cfg) {
    std::vector<std::string> callers = take_callers(task, cfg);
    std::string docstring = cfg.nl ? task.docstring : "";
    return serialize_fields(task.header, callers, docstring);
}

std::string render_natural(const PromptTask& task, const PromptConfig& cfg) {
    std::vector<std::string> callers = take_callers(task, cfg);
    std::string out = "Task:\n";
    out += kTaskInstruction;
    out += "\n";
    if (!callers.empty()) {
        out += "\nCaller Context:\n";
        if (callers.size() == 1) {
            out += "```python\n" + callers[0] + "\n```\n";
        } else {
            for (std::size_t i = 0; i < callers.size(); ++i) {
                out += "Caller " + std::to_string(i + 1) + ":\n";
                out += "```python\n" + callers[i] + "\n```\n";
            }
        }
    }
    out += "\nTarget Function:\n";
    out += "```python\n" + task.header + "\n```\n";
    if (cfg.nl && !task.docstring.empty()) {
        out += "\nDocstring:\n";
        out += "```\n" + task.docstring + "\n```\n";
    }
    return out;
}

std::string render(const PromptTask& task, const PromptConfig& cfg) {
    return cfg.style == PromptConfig::Structured ? render_structured(task, cfg)
                                                 : render_natural(task, cfg);
}

} // namespace callerkit
