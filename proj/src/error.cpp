#include "leafid/error.hpp"

namespace leafid {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::Io: return "Io";
        case ErrorCode::EmptySegmentation: return "EmptySegmentation";
        case ErrorCode::NoContour: return "NoContour";
        case ErrorCode::DegenerateContour: return "DegenerateContour";
        case ErrorCode::RadiusTooSmall: return "RadiusTooSmall";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::DegenerateSpectrum: return "DegenerateSpectrum";
        case ErrorCode::TooFewSamples: return "TooFewSamples";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::EmptyClass: return "EmptyClass";
        case ErrorCode::EmptyDataset: return "EmptyDataset";
        case ErrorCode::VersionMismatch: return "VersionMismatch";
        case ErrorCode::CorruptModel: return "CorruptModel";
    }
    return "Unknown";
}

}  // namespace leafid
