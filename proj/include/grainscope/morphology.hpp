/**
 * @file morphology.hpp
 * @brief Per-grain shape features: area, equivalent-ellipse axes,
 *        eccentricity and traced perimeter.
 */
#pragma once

#include "grainscope/segment.hpp"

#include <array>
#include <string_view>

namespace grainscope::morphology {

/// Normalized second central moments of a pixel region. mu_xx and mu_yy carry
/// the 1/12 unit-square term, so a single pixel is not a point mass.
struct CentralMoments {
    std::size_t area = 0;
    double centroid_row = 0.0;
    double centroid_col = 0.0;
    double mu_xx = 0.0;  ///< columns
    double mu_yy = 0.0;  ///< rows
    double mu_xy = 0.0;
};

struct EllipseAxes {
    double major = 0.0;
    double minor = 0.0;
};

/// One row of the feature table. Lengths are in pixels, area in pixel count.
struct GrainFeatures {
    double area = 0.0;
    double major_axis = 0.0;
    double minor_axis = 0.0;
    double eccentricity = 0.0;
    double perimeter = 0.0;

    /// Field order used by the PCA data matrix and the CSV columns.
    std::array<double, 5> as_array() const { return {area, major_axis, minor_axis, eccentricity, perimeter}; }
    friend bool operator==(const GrainFeatures&, const GrainFeatures&) = default;
};

inline constexpr std::array<std::string_view, 5> kFeatureNames = {
    "area", "major_axis", "minor_axis", "eccentricity", "perimeter"};

CentralMoments central_moments(const segment::Region& region);

/// Axes of the ellipse with the same second moments:
/// 2*sqrt(2)*sqrt(mu_xx + mu_yy +/- sqrt((mu_xx - mu_yy)^2 + 4 mu_xy^2)).
EllipseAxes ellipse_axes(const CentralMoments& m);

/// sqrt(1 - (minor/major)^2). Throws DegenerateAxes unless major >= minor > 0.
double eccentricity_of(double major, double minor);

/// Outer contour length from clockwise Moore-neighbor tracing, weighting axial
/// steps 1 and diagonal steps sqrt(2). A lone pixel measures 4.
double trace_perimeter(const segment::Region& region, const segment::LabelMap& parent);

GrainFeatures extract_features(const segment::Region& region, const segment::LabelMap& parent);

/// Convenience: features of every region, in label order.
std::vector<GrainFeatures> extract_all(const segment::Labeling& labeling);

}  // namespace grainscope::morphology
