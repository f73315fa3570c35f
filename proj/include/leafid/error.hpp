#pragma once

#include <stdexcept>
#include <string>

namespace leafid {

enum class ErrorCode {
    InvalidArgument,
    Io,
    EmptySegmentation,
    NoContour,
    DegenerateContour,
    RadiusTooSmall,
    LengthMismatch,
    DegenerateSpectrum,
    TooFewSamples,
    DimensionMismatch,
    EmptyClass,
    EmptyDataset,
    VersionMismatch,
    CorruptModel,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so that
/// callers (notably the CLI) can map it onto an exit status.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace leafid
