#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace parmono {

enum class ErrorCode {
    SyntaxError,
    UnknownIdentifier,
    ParamOutOfRange,
    EvalSingular,
    NearPole,
    PoleCollision,
    SingularGauge,
    ResonantSpectrum,
    NotSimple,
    IntegrationFailure,
    StepUnderflow,
    NonFinite,
    MissingRecord,
    SamplingExhausted,
    NotFuchsian,
    SingularReference,
    SingularMonodromy,
    InsufficientGrid,
    Collision,
    PoleMigration,
    FileNotFound,
    MissingDirection,
    DimensionMismatch,
    InvalidInput,
};

/// Machine-readable name, e.g. "NEAR_POLE".
[[nodiscard]] std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail),
          code_(code), detail_(detail) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

}  // namespace parmono
