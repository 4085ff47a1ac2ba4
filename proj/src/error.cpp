#include "ifpt/error.hpp"

namespace ifpt {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NonPositiveAlpha: return "NonPositiveAlpha";
        case ErrorCode::NonPositiveSigma: return "NonPositiveSigma";
        case ErrorCode::NegativeBeta: return "NegativeBeta";
        case ErrorCode::NonFiniteParam: return "NonFiniteParam";
        case ErrorCode::NonPositiveInput: return "NonPositiveInput";
        case ErrorCode::OrderViolation: return "OrderViolation";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::BoundaryBelowStart: return "BoundaryBelowStart";
        case ErrorCode::DegenerateVariance: return "DegenerateVariance";
        case ErrorCode::InsufficientRecords: return "InsufficientRecords";
        case ErrorCode::NoBracket: return "NoBracket";
        case ErrorCode::InsufficientMass: return "InsufficientMass";
        case ErrorCode::TooFewKnots: return "TooFewKnots";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::DataError: return "DataError";
    }
    return "Unknown";
}

}  // namespace ifpt
