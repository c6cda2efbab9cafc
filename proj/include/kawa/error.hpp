#pragma once

#include <stdexcept>
#include <string>

namespace kawa {

/// Error category; the CLI maps each category to a process exit status.
enum class ErrorCategory {
    Internal = 1,
    Parse = 2,
    Validation = 3,
    Hypothesis = 4,
    NonConvergence = 5,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }
    int exit_code() const noexcept { return static_cast<int>(category_); }

private:
    ErrorCategory category_;
};

struct ParseError : Error {
    explicit ParseError(const std::string& w) : Error(ErrorCategory::Parse, w) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& w) : Error(ErrorCategory::Parse, w) {}
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& w) : Error(ErrorCategory::Validation, w) {}
};

/// A theorem hypothesis (e.g. the lower bound on g1) does not hold.
struct HypothesisError : Error {
    explicit HypothesisError(const std::string& w) : Error(ErrorCategory::Hypothesis, w) {}
};

struct IterationError : Error {
    IterationError(const std::string& w, double contraction)
        : Error(ErrorCategory::NonConvergence, w), contraction_factor(contraction) {}
    double contraction_factor;
};

struct DivergenceError : Error {
    DivergenceError(const std::string& w, std::size_t step)
        : Error(ErrorCategory::NonConvergence, w), step_index(step) {}
    std::size_t step_index;
};

struct SolverError : Error {
    SolverError(const std::string& w, double rcond)
        : Error(ErrorCategory::Internal, w), reciprocal_condition(rcond) {}
    double reciprocal_condition;
};

struct DimensionError : Error {
    explicit DimensionError(const std::string& w) : Error(ErrorCategory::Internal, w) {}
};

struct DomainError : Error {
    explicit DomainError(const std::string& w) : Error(ErrorCategory::Internal, w) {}
};

struct PreconditionError : Error {
    explicit PreconditionError(const std::string& w) : Error(ErrorCategory::Internal, w) {}
};

struct ContractError : Error {
    explicit ContractError(const std::string& w) : Error(ErrorCategory::Internal, w) {}
};

}  // namespace kawa
