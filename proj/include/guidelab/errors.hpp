#pragma once

#include <stdexcept>
#include <string>

namespace guidelab {

// Invalid configuration or precondition violation. Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A numeric evaluation produced a non-finite value. Carries the name of the
// offending sub-expression (the primitive op) and, when known, the enclosing
// function. Maps to CLI exit code 2.
class EvalError : public std::runtime_error {
public:
    EvalError(std::string op, std::string context = "")
        : std::runtime_error(context.empty()
                                 ? "non-finite value in sub-expression '" + op + "'"
                                 : "non-finite value in sub-expression '" + op + "' while evaluating " + context),
          op_(std::move(op)),
          context_(std::move(context)) {}

    const std::string& op() const noexcept { return op_; }
    const std::string& context() const noexcept { return context_; }

private:
    std::string op_;
    std::string context_;
};

// A sampling run aborted mid-trajectory. Records the step index and which
// sub-term of the guidance computation failed.
class RunError : public std::runtime_error {
public:
    RunError(int step_t, std::string sub_term, const std::string& detail)
        : std::runtime_error("run aborted at step t=" + std::to_string(step_t) +
                             " in sub-term '" + sub_term + "': " + detail),
          step_t_(step_t),
          sub_term_(std::move(sub_term)) {}

    int step_t() const noexcept { return step_t_; }
    const std::string& sub_term() const noexcept { return sub_term_; }

private:
    int step_t_;
    std::string sub_term_;
};

}  // namespace guidelab
