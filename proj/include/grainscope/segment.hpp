/**
 * @file segment.hpp
 * @brief Global Otsu threshold, binarization and 8-connected component labeling.
 *
 * Grains are assumed bright on a dark, uniform background and not touching
 * one another.
 */
#pragma once

#include "grainscope/raster.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace grainscope::segment {

/// Row-major foreground mask (true = grain pixel).
struct BinaryImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<bool> mask;

    bool at(std::size_t row, std::size_t col) const { return mask[row * width + col]; }
};

/// Row-major component ids: 0 = background, 1..count = components.
struct LabelMap {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint32_t> labels;
    std::uint32_t count = 0;

    std::uint32_t at(std::size_t row, std::size_t col) const { return labels[row * width + col]; }
    /// Label at a signed coordinate; anything outside the raster reads as background.
    std::uint32_t at_or_background(std::ptrdiff_t row, std::ptrdiff_t col) const;
};

struct Pixel {
    std::int32_t row = 0;
    std::int32_t col = 0;

    friend bool operator==(const Pixel&, const Pixel&) = default;
};

struct BoundingBox {
    std::int32_t min_row = 0;
    std::int32_t min_col = 0;
    std::int32_t max_row = 0;
    std::int32_t max_col = 0;

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Pixel set of one labeled component, in raster order.
struct Region {
    std::uint32_t label = 0;
    std::vector<Pixel> pixels;
    BoundingBox bounding_box;
};

enum class BorderPolicy { Keep, Exclude };

/// Threshold t maximizing the between-class variance of the 256-bin histogram,
/// splitting classes as {v <= t} and {v > t}. Ties resolve to the smallest t.
/// Throws NoContrast when the histogram has a single occupied bin.
std::uint8_t otsu_threshold(const raster::GrayImage& img);

/// mask[p] = img[p] > t.
BinaryImage binarize(const raster::GrayImage& img, std::uint8_t t);

struct Labeling {
    LabelMap map;
    std::vector<Region> regions;
};

/// Groups foreground pixels by 8-connectivity, drops components smaller than
/// `min_area` (and, with BorderPolicy::Exclude, components touching the frame),
/// then renumbers survivors 1..K in raster order of their first pixel.
Labeling label_components(const BinaryImage& bin, std::size_t min_area = 50,
                          BorderPolicy border = BorderPolicy::Keep);

/// Debug rendering: background 0, label l drawn as (l mod 255) + 1.
raster::GrayImage label_visualization(const LabelMap& map);

}  // namespace grainscope::segment
