#include "grainscope/pipeline.hpp"

#include "grainscope/error.hpp"

namespace grainscope {

ImageAnalysis analyze_image(const raster::GrayImage& img, const PipelineOptions& options) {
    const raster::GrayImage smooth = raster::median_filter(img, options.median_window);
    ImageAnalysis out;
    try {
        out.threshold = segment::otsu_threshold(smooth);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NoContrast) throw;
        out.labeling.map = segment::LabelMap{img.width(), img.height(),
                                             std::vector<std::uint32_t>(img.size(), 0), 0};
        return out;
    }
    out.labeling = segment::label_components(segment::binarize(smooth, *out.threshold), options.min_area,
                                             options.border);
    out.features = morphology::extract_all(out.labeling);
    return out;
}

}  // namespace grainscope
