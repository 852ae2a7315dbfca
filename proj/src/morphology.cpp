#include "grainscope/morphology.hpp"

#include "grainscope/error.hpp"

#include <cmath>
#include <numbers>

namespace grainscope::morphology {

namespace {

// Clockwise on screen (rows grow downward), starting east.
constexpr std::array<std::array<int, 2>, 8> kMoore = {{
    {0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}, {-1, -1}, {-1, 0}, {-1, 1},
}};
constexpr int kWest = 4;

int direction_of(int dr, int dc) {
    for (int d = 0; d < 8; ++d) {
        if (kMoore[d][0] == dr && kMoore[d][1] == dc) return d;
    }
    throw std::logic_error("Moore trace: backtrack pixel is not adjacent");
}

void require_non_empty(const segment::Region& region) {
    if (region.pixels.empty()) {
        throw Error(ErrorCode::EmptyRegion, "region " + std::to_string(region.label) + " has no pixels");
    }
}

}  // namespace

CentralMoments central_moments(const segment::Region& region) {
    require_non_empty(region);
    const auto n = static_cast<double>(region.pixels.size());
    double sum_r = 0.0;
    double sum_c = 0.0;
    for (const auto& p : region.pixels) {
        sum_r += p.row;
        sum_c += p.col;
    }
    CentralMoments m;
    m.area = region.pixels.size();
    m.centroid_row = sum_r / n;
    m.centroid_col = sum_c / n;
    double xx = 0.0;
    double yy = 0.0;
    double xy = 0.0;
    for (const auto& p : region.pixels) {
        const double dx = p.col - m.centroid_col;
        const double dy = p.row - m.centroid_row;
        xx += dx * dx;
        yy += dy * dy;
        xy += dx * dy;
    }
    m.mu_xx = xx / n + 1.0 / 12.0;
    m.mu_yy = yy / n + 1.0 / 12.0;
    m.mu_xy = xy / n;
    return m;
}

EllipseAxes ellipse_axes(const CentralMoments& m) {
    const double common = std::sqrt((m.mu_xx - m.mu_yy) * (m.mu_xx - m.mu_yy) + 4.0 * m.mu_xy * m.mu_xy);
    const double sum = m.mu_xx + m.mu_yy;
    return {2.0 * std::numbers::sqrt2 * std::sqrt(sum + common),
            2.0 * std::numbers::sqrt2 * std::sqrt(std::max(0.0, sum - common))};
}

double eccentricity_of(double major, double minor) {
    if (!(minor > 0.0) || !(major >= minor) || !std::isfinite(major)) {
        throw Error(ErrorCode::DegenerateAxes,
                    "need major >= minor > 0, got major=" + std::to_string(major) +
                        " minor=" + std::to_string(minor));
    }
    const double ratio = minor / major;
    return std::sqrt(1.0 - ratio * ratio);
}

double trace_perimeter(const segment::Region& region, const segment::LabelMap& parent) {
    require_non_empty(region);
    const std::uint32_t label = region.label;
    auto inside = [&](std::ptrdiff_t r, std::ptrdiff_t c) { return parent.at_or_background(r, c) == label; };

    // Raster-first pixel: its W, NW, N and NE neighbours are all outside the region.
    const segment::Pixel start = region.pixels.front();
    if (!inside(start.row, start.col)) {
        throw Error(ErrorCode::InvalidArgument, "region " + std::to_string(label) + " is not present in the label map");
    }

    // Finds the next boundary pixel scanning clockwise from `backtrack`;
    // returns the move direction or -1 for an isolated pixel.
    auto next_move = [&](std::ptrdiff_t r, std::ptrdiff_t c, int backtrack) {
        for (int i = 0; i < 8; ++i) {
            const int d = (backtrack + i) % 8;
            if (inside(r + kMoore[d][0], c + kMoore[d][1])) return d;
        }
        return -1;
    };

    std::ptrdiff_t r = start.row;
    std::ptrdiff_t c = start.col;
    int backtrack = kWest;
    const int first_move = next_move(r, c, backtrack);
    if (first_move < 0) return 4.0;

    double length = 0.0;
    int move = first_move;
    // Stops when the start pixel is about to repeat its first move (Jacob's criterion).
    do {
        // The neighbour scanned just before `move` is background; it becomes the
        // backtrack point of the pixel we step onto.
        const int prev = (move + 7) % 8;
        const std::ptrdiff_t back_r = r + kMoore[prev][0];
        const std::ptrdiff_t back_c = c + kMoore[prev][1];
        r += kMoore[move][0];
        c += kMoore[move][1];
        length += (move % 2 == 0) ? 1.0 : std::numbers::sqrt2;
        backtrack = direction_of(static_cast<int>(back_r - r), static_cast<int>(back_c - c));
        move = next_move(r, c, backtrack);
    } while (!(r == start.row && c == start.col && move == first_move));
    return length;
}

GrainFeatures extract_features(const segment::Region& region, const segment::LabelMap& parent) {
    const CentralMoments m = central_moments(region);
    const EllipseAxes axes = ellipse_axes(m);
    GrainFeatures f;
    f.area = static_cast<double>(m.area);
    f.major_axis = axes.major;
    f.minor_axis = axes.minor;
    f.eccentricity = eccentricity_of(axes.major, axes.minor);
    f.perimeter = trace_perimeter(region, parent);
    return f;
}

std::vector<GrainFeatures> extract_all(const segment::Labeling& labeling) {
    std::vector<GrainFeatures> out;
    out.reserve(labeling.regions.size());
    for (const auto& region : labeling.regions) out.push_back(extract_features(region, labeling.map));
    return out;
}

}  // namespace grainscope::morphology
