#include "grainscope/raster.hpp"

#include "grainscope/error.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <string>

namespace grainscope::raster {

GrayImage::GrayImage(std::size_t width, std::size_t height, std::uint8_t fill)
    : GrayImage(width, height, std::vector<std::uint8_t>(width * height, fill)) {}

GrayImage::GrayImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
    if (width_ == 0 || height_ == 0) {
        throw Error(ErrorCode::InvalidArgument, "image dimensions must be positive");
    }
    if (data_.size() != width_ * height_) {
        throw Error(ErrorCode::InvalidArgument,
                    "pixel buffer holds " + std::to_string(data_.size()) + " values, expected " +
                        std::to_string(width_ * height_));
    }
}

std::uint8_t luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
    // Integer weights keep the half-up rounding exact (140.75 -> 141, 0.5 -> 1).
    const unsigned weighted = 299u * r + 587u * g + 114u * b;
    return static_cast<std::uint8_t>(std::min(255u, (weighted + 500u) / 1000u));
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
    const std::string header =
        "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.pixels().begin(), img.pixels().end());
    return out;
}

void save_pgm(const GrayImage& img, const std::filesystem::path& path) {
    const auto bytes = encode_pgm(img);
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    }
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!os) {
        throw Error(ErrorCode::IoError, "write failed for " + path.string());
    }
}

GrayImage median_filter(const GrayImage& img, std::size_t window) {
    if (window == 0 || window % 2 == 0 || window > std::max(img.width(), img.height())) {
        throw Error(ErrorCode::BadWindow,
                    "median window " + std::to_string(window) + " must be odd, >= 1 and <= " +
                        std::to_string(std::max(img.width(), img.height())));
    }
    const auto w = static_cast<std::ptrdiff_t>(img.width());
    const auto h = static_cast<std::ptrdiff_t>(img.height());
    const auto radius = static_cast<std::ptrdiff_t>(window / 2);
    const std::size_t middle = window * window / 2;

    // Column indices are clamped once per column instead of per sample.
    std::vector<std::size_t> col_index(static_cast<std::size_t>(w + 2 * radius));
    for (std::ptrdiff_t c = -radius; c < w + radius; ++c) {
        col_index[static_cast<std::size_t>(c + radius)] =
            static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(c, 0, w - 1));
    }

    GrayImage out(img.width(), img.height());
    std::vector<std::uint8_t> samples(window * window);
    const auto src = img.pixels();
    for (std::ptrdiff_t r = 0; r < h; ++r) {
        for (std::ptrdiff_t c = 0; c < w; ++c) {
            std::size_t n = 0;
            for (std::ptrdiff_t dr = -radius; dr <= radius; ++dr) {
                const auto row = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(r + dr, 0, h - 1));
                const std::uint8_t* line = src.data() + row * img.width();
                for (std::ptrdiff_t dc = 0; dc < static_cast<std::ptrdiff_t>(window); ++dc) {
                    samples[n++] = line[col_index[static_cast<std::size_t>(c + dc)]];
                }
            }
            std::nth_element(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(middle),
                             samples.end());
            out.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = samples[middle];
        }
    }
    return out;
}

}  // namespace grainscope::raster
