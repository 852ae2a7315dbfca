/**
 * @file pipeline.hpp
 * @brief Image -> grain features: median filter, Otsu threshold, labeling, features.
 */
#pragma once

#include "grainscope/morphology.hpp"
#include "grainscope/raster.hpp"
#include "grainscope/segment.hpp"

#include <optional>
#include <vector>

namespace grainscope {

struct PipelineOptions {
    std::size_t median_window = 3;
    std::size_t min_area = 50;
    segment::BorderPolicy border = segment::BorderPolicy::Keep;
};

struct ImageAnalysis {
    std::optional<std::uint8_t> threshold;  ///< empty for a featureless (single-intensity) image
    segment::Labeling labeling;
    std::vector<morphology::GrainFeatures> features;
};

/// A single-intensity image (e.g. all black) yields no grains rather than NoContrast.
ImageAnalysis analyze_image(const raster::GrayImage& img, const PipelineOptions& options = {});

}  // namespace grainscope
