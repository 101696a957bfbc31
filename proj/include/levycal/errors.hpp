#pragma once

#include <stdexcept>
#include <string>

namespace levycal {

enum class ErrorCode {
    Config,
    TooFewSamples,
    DuplicateMoneyness,
    NonPositiveStrike,
    InvalidSigma0,
    SingularMomentSystem,
    QuadratureNotConverged,
    SeriesNotConverged,
    PhaseJumpTooLarge,
    ZeroVolatilityNoRule,
    EpsilonTooLarge,
    DeterminantTooSmall,
    ZeroEndpointWeight,
    CovarianceNotConverged,
    NegativeVariance,
    ReplicationFailures,
};

const char* error_name(ErrorCode code);

// Input/configuration problems map to CLI exit code 2, the rest to 3.
bool is_input_error(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& msg);
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

}  // namespace levycal
