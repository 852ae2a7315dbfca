#include "grainscope/synth.hpp"

#include "grainscope/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace grainscope::synth {

namespace {

struct Extent {
    double rows;
    double cols;
};

Extent half_extent(const GrainSpec& g) {
    const double c = std::cos(g.angle);
    const double s = std::sin(g.angle);
    return {std::sqrt(g.semi_major * g.semi_major * s * s + g.semi_minor * g.semi_minor * c * c),
            std::sqrt(g.semi_major * g.semi_major * c * c + g.semi_minor * g.semi_minor * s * s)};
}

void validate_grain(const GrainSpec& g, std::size_t index, std::uint8_t background) {
    const bool finite = std::isfinite(g.center_row) && std::isfinite(g.center_col) && std::isfinite(g.semi_major) &&
                        std::isfinite(g.semi_minor) && std::isfinite(g.angle);
    if (!finite || !(g.semi_minor > 0.0) || g.semi_major < g.semi_minor) {
        throw Error(ErrorCode::InvalidArgument,
                    "grain " + std::to_string(index) + ": need semi_major >= semi_minor > 0 and finite values");
    }
    if (g.intensity <= background) {
        throw Error(ErrorCode::InvalidArgument,
                    "grain " + std::to_string(index) + ": intensity must exceed the background");
    }
}

bool inside_frame(const GrainSpec& g, std::size_t width, std::size_t height) {
    const Extent e = half_extent(g);
    return g.center_row - e.rows >= -0.5 && g.center_row + e.rows <= static_cast<double>(height) - 0.5 &&
           g.center_col - e.cols >= -0.5 && g.center_col + e.cols <= static_cast<double>(width) - 0.5;
}

// Owner grid of placed footprints, used both for validation and placement.
class Occupancy {
public:
    Occupancy(std::size_t width, std::size_t height) : width_(width), height_(height), owner_(width * height, -1) {}

    // True if no pixel within `gap` (Chebyshev) of the footprint is owned.
    bool is_free(const std::vector<segment::Pixel>& footprint, std::ptrdiff_t gap) const {
        for (const auto& p : footprint) {
            for (std::ptrdiff_t dr = -gap; dr <= gap; ++dr) {
                for (std::ptrdiff_t dc = -gap; dc <= gap; ++dc) {
                    const std::ptrdiff_t r = p.row + dr;
                    const std::ptrdiff_t c = p.col + dc;
                    if (r < 0 || c < 0 || r >= static_cast<std::ptrdiff_t>(height_) ||
                        c >= static_cast<std::ptrdiff_t>(width_)) {
                        continue;
                    }
                    if (owner_[static_cast<std::size_t>(r) * width_ + static_cast<std::size_t>(c)] >= 0) return false;
                }
            }
        }
        return true;
    }

    void claim(const std::vector<segment::Pixel>& footprint, int id) {
        for (const auto& p : footprint) {
            owner_[static_cast<std::size_t>(p.row) * width_ + static_cast<std::size_t>(p.col)] = id;
        }
    }

private:
    std::size_t width_;
    std::size_t height_;
    std::vector<int> owner_;
};

}  // namespace

std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t bound) {
    if (bound == 0) throw Error(ErrorCode::InvalidArgument, "uniform_index bound must be positive");
    // Rejection keeps the result unbiased; the accepted range is a multiple of bound.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

double uniform_unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<segment::Pixel> rasterize(const GrainSpec& g) {
    const Extent e = half_extent(g);
    const double cs = std::cos(g.angle);
    const double sn = std::sin(g.angle);
    const double a2 = g.semi_major * g.semi_major;
    const double b2 = g.semi_minor * g.semi_minor;
    std::vector<segment::Pixel> out;
    const auto r0 = static_cast<std::int32_t>(std::ceil(g.center_row - e.rows));
    const auto r1 = static_cast<std::int32_t>(std::floor(g.center_row + e.rows));
    const auto c0 = static_cast<std::int32_t>(std::ceil(g.center_col - e.cols));
    const auto c1 = static_cast<std::int32_t>(std::floor(g.center_col + e.cols));
    for (std::int32_t r = r0; r <= r1; ++r) {
        for (std::int32_t c = c0; c <= c1; ++c) {
            const double dx = c - g.center_col;
            const double dy = r - g.center_row;
            const double u = dx * cs + dy * sn;
            const double v = -dx * sn + dy * cs;
            if (u * u / a2 + v * v / b2 <= 1.0) out.push_back({r, c});
        }
    }
    return out;
}

Scene render_scene(const SceneSpec& spec) {
    if (!(spec.noise_density >= 0.0 && spec.noise_density < 1.0)) {
        throw Error(ErrorCode::BadDensity, "noise density " + std::to_string(spec.noise_density) + " outside [0, 1)");
    }
    raster::GrayImage image(spec.width, spec.height, spec.background);
    Occupancy occupancy(spec.width, spec.height);
    std::vector<GrainTruth> truth;
    truth.reserve(spec.grains.size());
    for (std::size_t i = 0; i < spec.grains.size(); ++i) {
        const GrainSpec& g = spec.grains[i];
        validate_grain(g, i, spec.background);
        if (!inside_frame(g, spec.width, spec.height)) {
            throw Error(ErrorCode::GrainOutOfBounds, "grain " + std::to_string(i) + " leaves the frame");
        }
        const auto footprint = rasterize(g);
        if (!occupancy.is_free(footprint, 1)) {
            throw Error(ErrorCode::GrainsOverlap, "grain " + std::to_string(i) + " overlaps or touches an earlier grain");
        }
        occupancy.claim(footprint, static_cast<int>(i));
        for (const auto& p : footprint) {
            image.at(static_cast<std::size_t>(p.row), static_cast<std::size_t>(p.col)) = g.intensity;
        }
        const double ratio = g.semi_minor / g.semi_major;
        truth.push_back({g, std::numbers::pi * g.semi_major * g.semi_minor, std::sqrt(1.0 - ratio * ratio)});
    }
    if (spec.noise_density > 0.0) image = add_salt_pepper(image, spec.noise_density, spec.seed);
    return {std::move(image), std::move(truth)};
}

raster::GrayImage add_salt_pepper(const raster::GrayImage& img, double density, std::uint64_t seed) {
    if (!(density >= 0.0 && density < 1.0)) {
        throw Error(ErrorCode::BadDensity, "noise density " + std::to_string(density) + " outside [0, 1)");
    }
    raster::GrayImage out = img;
    const std::size_t total = img.size();
    const auto count = static_cast<std::size_t>(std::llround(density * static_cast<double>(total)));
    if (count == 0) return out;

    // Partial Fisher-Yates: the first `count` slots become a uniform sample of distinct pixels.
    std::vector<std::uint32_t> index(total);
    for (std::size_t i = 0; i < total; ++i) index[i] = static_cast<std::uint32_t>(i);
    std::mt19937_64 rng(seed);
    auto px = out.pixels();
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(uniform_index(rng, total - i));
        std::swap(index[i], index[j]);
        px[index[i]] = (rng() >> 63) != 0 ? 255 : 0;
    }
    return out;
}

SceneSpec scatter_grains(std::size_t width, std::size_t height, std::size_t count, const GrainSampler& sampler,
                         std::uint64_t seed, std::size_t gap, std::size_t max_attempts) {
    SceneSpec spec;
    spec.width = width;
    spec.height = height;
    spec.seed = seed;
    std::mt19937_64 rng(seed);
    Occupancy occupancy(width, height);
    for (std::size_t i = 0; i < count; ++i) {
        const GrainSpec shape = sampler(rng);
        bool placed = false;
        for (std::size_t attempt = 0; attempt < max_attempts && !placed; ++attempt) {
            GrainSpec g = shape;
            g.angle = uniform_unit(rng) * std::numbers::pi;
            g.center_row = uniform_unit(rng) * static_cast<double>(height);
            g.center_col = uniform_unit(rng) * static_cast<double>(width);
            if (!inside_frame(g, width, height)) continue;
            const auto footprint = rasterize(g);
            if (!occupancy.is_free(footprint, static_cast<std::ptrdiff_t>(std::max<std::size_t>(gap, 1)))) continue;
            occupancy.claim(footprint, static_cast<int>(i));
            spec.grains.push_back(g);
            placed = true;
        }
        if (!placed) {
            throw Error(ErrorCode::InvalidArgument, "could not place grain " + std::to_string(i) + " in a " +
                                                        std::to_string(width) + "x" + std::to_string(height) + " scene");
        }
    }
    return spec;
}

}  // namespace grainscope::synth
