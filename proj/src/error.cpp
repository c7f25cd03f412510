#include "magneto/error.hpp"

namespace magneto {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::NotClosed: return "NotClosed";
    case ErrorCode::OffsetCollapse: return "OffsetCollapse";
    case ErrorCode::RemeshDiverged: return "RemeshDiverged";
    case ErrorCode::EmptySection: return "EmptySection";
    case ErrorCode::BooleanFailure: return "BooleanFailure";
    case ErrorCode::SpecInvalid: return "SpecInvalid";
    case ErrorCode::EmptyPlacement: return "EmptyPlacement";
    case ErrorCode::ProjectionMiss: return "ProjectionMiss";
    case ErrorCode::NoLayersFound: return "NoLayersFound";
    case ErrorCode::LayerMismatch: return "LayerMismatch";
    case ErrorCode::OutOfBed: return "OutOfBed";
    case ErrorCode::ZeroRatio: return "ZeroRatio";
    case ErrorCode::JobState: return "JobState";
    }
    return "Unknown";
}

int exit_code(ErrorCode code)
{
    // 1 is left for unexpected exceptions.
    return 10 + static_cast<int>(code);
}

} // namespace magneto
