#include "levycal/errors.hpp"

namespace levycal {

const char* error_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::Config: return "ConfigError";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::DuplicateMoneyness: return "DuplicateMoneyness";
    case ErrorCode::NonPositiveStrike: return "NonPositiveStrike";
    case ErrorCode::InvalidSigma0: return "InvalidSigma0";
    case ErrorCode::SingularMomentSystem: return "SingularMomentSystem";
    case ErrorCode::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorCode::SeriesNotConverged: return "SeriesNotConverged";
    case ErrorCode::PhaseJumpTooLarge: return "PhaseJumpTooLarge";
    case ErrorCode::ZeroVolatilityNoRule: return "ZeroVolatilityNoRule";
    case ErrorCode::EpsilonTooLarge: return "EpsilonTooLarge";
    case ErrorCode::DeterminantTooSmall: return "DeterminantTooSmall";
    case ErrorCode::ZeroEndpointWeight: return "ZeroEndpointWeight";
    case ErrorCode::CovarianceNotConverged: return "CovarianceNotConverged";
    case ErrorCode::NegativeVariance: return "NegativeVariance";
    case ErrorCode::ReplicationFailures: return "ReplicationFailures";
    }
    return "Unknown";
}

bool is_input_error(ErrorCode code) {
    switch (code) {
    case ErrorCode::Config:
    case ErrorCode::TooFewSamples:
    case ErrorCode::DuplicateMoneyness:
    case ErrorCode::NonPositiveStrike:
    case ErrorCode::InvalidSigma0:
        return true;
    default:
        return false;
    }
}

Error::Error(ErrorCode code, const std::string& msg)
    : std::runtime_error(std::string(error_name(code)) + ": " + msg), code_(code) {}

}  // namespace levycal
