#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace replicator {

enum class ErrorCode {
    ParameterOutOfRange,
    UnknownPreferenceTarget,
    InvalidMatrix,
    InvalidState,
    DimensionMismatch,
    NonFiniteState,
    ConvergenceFailure,
    NotAFixedPoint,
    NoAttractor,
    ParseError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
        case ErrorCode::ParameterOutOfRange: return "ParameterOutOfRange";
        case ErrorCode::UnknownPreferenceTarget: return "UnknownPreferenceTarget";
        case ErrorCode::InvalidMatrix: return "InvalidMatrix";
        case ErrorCode::InvalidState: return "InvalidState";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NonFiniteState: return "NonFiniteState";
        case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
        case ErrorCode::NotAFixedPoint: return "NotAFixedPoint";
        case ErrorCode::NoAttractor: return "NoAttractor";
        case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

/// True for errors caused by user input rather than by the numerics.
constexpr bool is_argument_error(ErrorCode code) noexcept
{
    switch (code) {
        case ErrorCode::ParameterOutOfRange:
        case ErrorCode::UnknownPreferenceTarget:
        case ErrorCode::InvalidMatrix:
        case ErrorCode::InvalidState:
        case ErrorCode::DimensionMismatch:
        case ErrorCode::ParseError:
            return true;
        default:
            return false;
    }
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace replicator
