#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dsr {

enum class ErrorCode {
    DimensionMismatch,
    DegenerateVolatility,
    NonpositiveHorizon,
    SingularVolatility,
    DomainError,
    TargetOutOfRange,
    NoSignChange,
    MaxIterations,
    SingularJacobian,
    InfeasibleBudget,
    TargetTooHigh,
    InvalidProblem,
    SolverDiverged,
    PolicyUndefinedAtTerminal,
    EmptySample,
    NumericalBreakdown,
    ConfigError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable code; every library failure is one of these.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

}  // namespace dsr
