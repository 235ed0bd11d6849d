#include "dsr/error.hpp"

namespace dsr {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::DegenerateVolatility: return "DegenerateVolatility";
        case ErrorCode::NonpositiveHorizon: return "NonpositiveHorizon";
        case ErrorCode::SingularVolatility: return "SingularVolatility";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::TargetOutOfRange: return "TargetOutOfRange";
        case ErrorCode::NoSignChange: return "NoSignChange";
        case ErrorCode::MaxIterations: return "MaxIterations";
        case ErrorCode::SingularJacobian: return "SingularJacobian";
        case ErrorCode::InfeasibleBudget: return "InfeasibleBudget";
        case ErrorCode::TargetTooHigh: return "TargetTooHigh";
        case ErrorCode::InvalidProblem: return "InvalidProblem";
        case ErrorCode::SolverDiverged: return "SolverDiverged";
        case ErrorCode::PolicyUndefinedAtTerminal: return "PolicyUndefinedAtTerminal";
        case ErrorCode::EmptySample: return "EmptySample";
        case ErrorCode::NumericalBreakdown: return "NumericalBreakdown";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

}  // namespace dsr
