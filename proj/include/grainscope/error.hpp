/**
 * @file error.hpp
 * @brief Error type shared by every grainscope module.
 */
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace grainscope {

enum class ErrorCode {
    // raster
    FileNotFound,
    UnsupportedFormat,
    CorruptImage,
    BadWindow,
    // segment
    NoContrast,
    // morphology
    EmptyRegion,
    DegenerateAxes,
    // pca
    NotSymmetric,
    NoConvergence,
    DimensionMismatch,
    BadK,
    TooFewObservations,
    // classify
    TooFewVarieties,
    TooFewGrains,
    EmptySample,
    EmptyTestSet,
    // synth
    GrainOutOfBounds,
    GrainsOverlap,
    BadDensity,
    // shared
    InvalidArgument,
    ParseError,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Input or contract violation reported by a library operation.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }
    /// Message without the error-code prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

}  // namespace grainscope
