#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qfi {

enum class ErrorKind {
    // input validation
    NotHermitian,
    TraceNotOne,
    NotPositiveSemidefinite,
    InvalidArgument,
    DimensionMismatch,
    StepTooLarge,
    EvaluationFailure,
    IncompleteBundle,
    NotNormalized,
    NotQubit,
    WeightMismatch,
    InconsistentBlockDims,
    InvalidEnsemble,
    InvalidSize,
    UnsupportedParametrization,
    TruncationTooSmall,
    ParseError,
    // numerical
    EigensolverFailure,
    DegenerateGap,
    SupportDimensionChanged,
    SingularDeterminant,
    DegenerateWeight,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Numerical failures (as opposed to bad input) map to a distinct CLI exit code.
bool is_numerical(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace qfi
