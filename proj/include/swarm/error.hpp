#pragma once

#include <stdexcept>
#include <string>

namespace swarm {

enum class ErrorCode {
    NonFinite,
    CoincidentPoints,
    ZeroDirection,
    ObserverInsideObstacle,
    NonpositiveInterval,
    NoClosing,
    OutOfBounds,
    ZeroVelocity,
    NoFeasiblePlan,
    InfeasiblePlan,
    SizeMismatch,
    DegenerateKernel,
    InvalidArgument,
    InvalidScenario,
    EmptyTrace,
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::CoincidentPoints: return "CoincidentPoints";
    case ErrorCode::ZeroDirection: return "ZeroDirection";
    case ErrorCode::ObserverInsideObstacle: return "ObserverInsideObstacle";
    case ErrorCode::NonpositiveInterval: return "NonpositiveInterval";
    case ErrorCode::NoClosing: return "NoClosing";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::ZeroVelocity: return "ZeroVelocity";
    case ErrorCode::NoFeasiblePlan: return "NoFeasiblePlan";
    case ErrorCode::InfeasiblePlan: return "InfeasiblePlan";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::DegenerateKernel: return "DegenerateKernel";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidScenario: return "InvalidScenario";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and tests) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace swarm
