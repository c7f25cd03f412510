#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace magneto {

// Machine-readable failure codes. Every fatal error raised by the library
// carries exactly one of these; the CLI maps them onto process exit codes.
enum class ErrorCode {
    InvalidArgument,
    IoError,
    ParseError,
    ConfigError,
    NotClosed,
    OffsetCollapse,
    RemeshDiverged,
    EmptySection,
    BooleanFailure,
    SpecInvalid,
    EmptyPlacement,
    ProjectionMiss,
    NoLayersFound,
    LayerMismatch,
    OutOfBed,
    ZeroRatio,
    JobState,
};

std::string_view to_string(ErrorCode code);
int exit_code(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string &message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace magneto
