/**
 * @file raster.hpp
 * @brief Grayscale image container, file ingestion and median-filter denoising.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace grainscope::raster {

/// Row-major 8-bit intensity raster (0 = black, 255 = white).
class GrayImage {
public:
    /// Constant image of the given size. Throws InvalidArgument on a zero dimension.
    GrayImage(std::size_t width, std::size_t height, std::uint8_t fill = 0);
    /// Takes ownership of `data`; its length must equal width * height.
    GrayImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> data);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }

    std::uint8_t at(std::size_t row, std::size_t col) const { return data_[row * width_ + col]; }
    std::uint8_t& at(std::size_t row, std::size_t col) { return data_[row * width_ + col]; }

    std::span<const std::uint8_t> pixels() const noexcept { return data_; }
    std::span<std::uint8_t> pixels() noexcept { return data_; }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    std::size_t width_;
    std::size_t height_;
    std::vector<std::uint8_t> data_;
};

/// BT.601 luma, rounded half-up: Y = 0.299 R + 0.587 G + 0.114 B.
std::uint8_t luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept;

/// Decodes PNG, JPEG or binary PGM (P5). Color input is reduced with luminance().
/// Throws FileNotFound, UnsupportedFormat or CorruptImage.
GrayImage load_grayscale(const std::filesystem::path& path);

/// Same as load_grayscale() on an in-memory file image.
GrayImage decode_grayscale(std::span<const std::uint8_t> bytes);

/// Binary PGM encoding: "P5\n<w> <h>\n255\n" followed by raw row-major bytes.
std::vector<std::uint8_t> encode_pgm(const GrayImage& img);
void save_pgm(const GrayImage& img, const std::filesystem::path& path);

/// Square-window median with edge replication at the borders.
/// `window` must be odd, >= 1 and no larger than the image's longer side;
/// otherwise BadWindow. A thin image is filtered through replicated rows/columns.
GrayImage median_filter(const GrayImage& img, std::size_t window = 3);

}  // namespace grainscope::raster
