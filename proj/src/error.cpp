#include "qfi/error.hpp"

namespace qfi {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::NotHermitian: return "NotHermitian";
        case ErrorKind::TraceNotOne: return "TraceNotOne";
        case ErrorKind::NotPositiveSemidefinite: return "NotPositiveSemidefinite";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::StepTooLarge: return "StepTooLarge";
        case ErrorKind::EvaluationFailure: return "EvaluationFailure";
        case ErrorKind::IncompleteBundle: return "IncompleteBundle";
        case ErrorKind::NotNormalized: return "NotNormalized";
        case ErrorKind::NotQubit: return "NotQubit";
        case ErrorKind::WeightMismatch: return "WeightMismatch";
        case ErrorKind::InconsistentBlockDims: return "InconsistentBlockDims";
        case ErrorKind::InvalidEnsemble: return "InvalidEnsemble";
        case ErrorKind::InvalidSize: return "InvalidSize";
        case ErrorKind::UnsupportedParametrization: return "UnsupportedParametrization";
        case ErrorKind::TruncationTooSmall: return "TruncationTooSmall";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::EigensolverFailure: return "EigensolverFailure";
        case ErrorKind::DegenerateGap: return "DegenerateGap";
        case ErrorKind::SupportDimensionChanged: return "SupportDimensionChanged";
        case ErrorKind::SingularDeterminant: return "SingularDeterminant";
        case ErrorKind::DegenerateWeight: return "DegenerateWeight";
    }
    return "Unknown";
}

bool is_numerical(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::EigensolverFailure:
        case ErrorKind::DegenerateGap:
        case ErrorKind::SupportDimensionChanged:
        case ErrorKind::SingularDeterminant:
        case ErrorKind::DegenerateWeight:
            return true;
        default:
            return false;
    }
}

}  // namespace qfi
