#include "grainscope/error.hpp"

namespace grainscope {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::FileNotFound:       return "FileNotFound";
        case ErrorCode::UnsupportedFormat:  return "UnsupportedFormat";
        case ErrorCode::CorruptImage:       return "CorruptImage";
        case ErrorCode::BadWindow:          return "BadWindow";
        case ErrorCode::NoContrast:         return "NoContrast";
        case ErrorCode::EmptyRegion:        return "EmptyRegion";
        case ErrorCode::DegenerateAxes:     return "DegenerateAxes";
        case ErrorCode::NotSymmetric:       return "NotSymmetric";
        case ErrorCode::NoConvergence:      return "NoConvergence";
        case ErrorCode::DimensionMismatch:  return "DimensionMismatch";
        case ErrorCode::BadK:               return "BadK";
        case ErrorCode::TooFewObservations: return "TooFewObservations";
        case ErrorCode::TooFewVarieties:    return "TooFewVarieties";
        case ErrorCode::TooFewGrains:       return "TooFewGrains";
        case ErrorCode::EmptySample:        return "EmptySample";
        case ErrorCode::EmptyTestSet:       return "EmptyTestSet";
        case ErrorCode::GrainOutOfBounds:   return "GrainOutOfBounds";
        case ErrorCode::GrainsOverlap:      return "GrainsOverlap";
        case ErrorCode::BadDensity:         return "BadDensity";
        case ErrorCode::InvalidArgument:    return "InvalidArgument";
        case ErrorCode::ParseError:         return "ParseError";
        case ErrorCode::IoError:            return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

}  // namespace grainscope
