#include "parmono/error.hpp"

namespace parmono {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::SyntaxError: return "SYNTAX_ERROR";
        case ErrorCode::UnknownIdentifier: return "UNKNOWN_IDENTIFIER";
        case ErrorCode::ParamOutOfRange: return "PARAM_OUT_OF_RANGE";
        case ErrorCode::EvalSingular: return "EVAL_SINGULAR";
        case ErrorCode::NearPole: return "NEAR_POLE";
        case ErrorCode::PoleCollision: return "POLE_COLLISION";
        case ErrorCode::SingularGauge: return "SINGULAR_GAUGE";
        case ErrorCode::ResonantSpectrum: return "RESONANT_SPECTRUM";
        case ErrorCode::NotSimple: return "NOT_SIMPLE";
        case ErrorCode::IntegrationFailure: return "INTEGRATION_FAILURE";
        case ErrorCode::StepUnderflow: return "STEP_UNDERFLOW";
        case ErrorCode::NonFinite: return "NONFINITE";
        case ErrorCode::MissingRecord: return "MISSING_RECORD";
        case ErrorCode::SamplingExhausted: return "SAMPLING_EXHAUSTED";
        case ErrorCode::NotFuchsian: return "NOT_FUCHSIAN";
        case ErrorCode::SingularReference: return "SINGULAR_REFERENCE";
        case ErrorCode::SingularMonodromy: return "SINGULAR_MONODROMY";
        case ErrorCode::InsufficientGrid: return "INSUFFICIENT_GRID";
        case ErrorCode::Collision: return "COLLISION";
        case ErrorCode::PoleMigration: return "POLE_MIGRATION";
        case ErrorCode::FileNotFound: return "FILE_NOT_FOUND";
        case ErrorCode::MissingDirection: return "MISSING_DIRECTION";
        case ErrorCode::DimensionMismatch: return "DIMENSION_MISMATCH";
        case ErrorCode::InvalidInput: return "INVALID_INPUT";
    }
    return "UNKNOWN";
}

}  // namespace parmono
