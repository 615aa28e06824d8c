#pragma once

#include <stdexcept>
#include <string>

namespace elastic {

enum class ErrorCode {
    InvalidMaterial,
    NonIncreasingDepths,
    NoJump,
    InvalidScenario,
    Glancing,
    GlancingProximity,
    ForbiddenIncoming,
    StoneleySingular,
    RayleighSingular,
    SingularSystem,
    DegenerateAngle,
    ControlImpossible,
    NearSingularControl,
    OutOfDomain,
    RootNotBracketed,
    Trapped,
    NoKinkFound,
    NonMonotone,
    AssumptionViolated,
    InsufficientCoverage,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

}  // namespace elastic
