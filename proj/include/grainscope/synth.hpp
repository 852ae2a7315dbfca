/**
 * @file synth.hpp
 * @brief Synthetic grain scenes with analytic ground truth.
 *
 * Grains are filled rotated ellipses; a pixel belongs to a grain iff its
 * center lies inside the ellipse. `angle` is measured from the +column axis
 * toward +row (clockwise on screen).
 */
#pragma once

#include "grainscope/raster.hpp"
#include "grainscope/segment.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace grainscope::synth {

struct GrainSpec {
    double center_row = 0.0;
    double center_col = 0.0;
    double semi_major = 1.0;
    double semi_minor = 1.0;
    double angle = 0.0;  ///< radians
    std::uint8_t intensity = 255;

    friend bool operator==(const GrainSpec&, const GrainSpec&) = default;
};

struct SceneSpec {
    std::size_t width = 0;
    std::size_t height = 0;
    std::uint8_t background = 0;
    std::vector<GrainSpec> grains;
    double noise_density = 0.0;
    std::uint64_t seed = 0;

    friend bool operator==(const SceneSpec&, const SceneSpec&) = default;
};

struct GrainTruth {
    GrainSpec grain;
    double area = 0.0;          ///< pi * a * b
    double eccentricity = 0.0;  ///< sqrt(1 - (b/a)^2)
};

struct Scene {
    raster::GrayImage image;
    std::vector<GrainTruth> truth;
};

/// Pixel centers inside the grain's ellipse, in raster order (unclipped).
std::vector<segment::Pixel> rasterize(const GrainSpec& grain);

/// Draws every grain, then applies salt-and-pepper noise at spec.noise_density.
/// Throws GrainOutOfBounds when an ellipse leaves the frame, GrainsOverlap when
/// two footprints share or touch (8-adjacency) a pixel, InvalidArgument for a
/// malformed grain and BadDensity for a density outside [0, 1).
Scene render_scene(const SceneSpec& spec);

/// Sets exactly round(density * pixels) distinct, seed-chosen pixels to 0 or 255
/// (fair coin). Throws BadDensity unless 0 <= density < 1.
raster::GrayImage add_salt_pepper(const raster::GrayImage& img, double density, std::uint64_t seed);

/// Draws a grain shape (axes, intensity; center and angle are overwritten).
using GrainSampler = std::function<GrainSpec(std::mt19937_64&)>;

/// Places `count` grains at random positions and angles by rejection sampling,
/// keeping at least `gap` background pixels between footprints. Throws
/// InvalidArgument if a grain cannot be placed after `max_attempts` tries.
SceneSpec scatter_grains(std::size_t width, std::size_t height, std::size_t count, const GrainSampler& sampler,
                         std::uint64_t seed, std::size_t gap = 2, std::size_t max_attempts = 20000);

/// Integer in [0, bound) from raw generator output, identical on every platform.
std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t bound);
/// Real in [0, 1) built from the top 53 bits of one draw.
double uniform_unit(std::mt19937_64& rng);

}  // namespace grainscope::synth
