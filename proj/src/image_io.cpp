// File decoding for load_grayscale(): binary PGM, PNG (libpng) and JPEG (libjpeg).

#include "grainscope/error.hpp"
#include "grainscope/raster.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include <jpeglib.h>

namespace grainscope::raster {

namespace {

bool is_pgm(std::span<const std::uint8_t> b) { return b.size() >= 2 && b[0] == 'P' && b[1] == '5'; }

bool is_png(std::span<const std::uint8_t> b) {
    static constexpr std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    return b.size() >= 8 && std::memcmp(b.data(), sig, 8) == 0;
}

bool is_jpeg(std::span<const std::uint8_t> b) {
    return b.size() >= 3 && b[0] == 0xFF && b[1] == 0xD8 && b[2] == 0xFF;
}

// Reads one header token, skipping whitespace and '#' comments.
std::size_t pgm_token(std::span<const std::uint8_t> b, std::size_t& pos) {
    auto space = [](std::uint8_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
    while (pos < b.size()) {
        if (space(b[pos])) {
            ++pos;
        } else if (b[pos] == '#') {
            while (pos < b.size() && b[pos] != '\n') ++pos;
        } else {
            break;
        }
    }
    std::size_t value = 0;
    std::size_t digits = 0;
    while (pos < b.size() && b[pos] >= '0' && b[pos] <= '9') {
        value = value * 10 + (b[pos] - '0');
        ++pos;
        if (++digits > 9) throw Error(ErrorCode::CorruptImage, "PGM header value too large");
    }
    if (digits == 0) throw Error(ErrorCode::CorruptImage, "malformed PGM header");
    return value;
}

GrayImage decode_pgm(std::span<const std::uint8_t> b) {
    std::size_t pos = 2;
    const std::size_t width = pgm_token(b, pos);
    const std::size_t height = pgm_token(b, pos);
    const std::size_t maxval = pgm_token(b, pos);
    if (pos >= b.size() || !(b[pos] == ' ' || b[pos] == '\n' || b[pos] == '\r' || b[pos] == '\t')) {
        throw Error(ErrorCode::CorruptImage, "PGM header not terminated by whitespace");
    }
    ++pos;
    if (width == 0 || height == 0) throw Error(ErrorCode::CorruptImage, "PGM has zero dimension");
    if (maxval == 0 || maxval > 255) {
        throw Error(ErrorCode::UnsupportedFormat, "PGM maxval " + std::to_string(maxval) + " (only 8-bit supported)");
    }
    if (b.size() - pos < width * height) throw Error(ErrorCode::CorruptImage, "PGM pixel data truncated");
    std::vector<std::uint8_t> data(b.begin() + static_cast<std::ptrdiff_t>(pos),
                                   b.begin() + static_cast<std::ptrdiff_t>(pos + width * height));
    if (maxval != 255) {
        for (auto& v : data) {
            if (v > maxval) throw Error(ErrorCode::CorruptImage, "PGM sample exceeds maxval");
            v = static_cast<std::uint8_t>((v * 255u * 2 + maxval) / (2 * maxval));
        }
    }
    return GrayImage(width, height, std::move(data));
}

GrayImage rgb_to_gray(std::size_t width, std::size_t height, const std::vector<std::uint8_t>& rgb) {
    std::vector<std::uint8_t> gray(width * height);
    for (std::size_t i = 0; i < gray.size(); ++i) {
        gray[i] = luminance(rgb[3 * i], rgb[3 * i + 1], rgb[3 * i + 2]);
    }
    return GrayImage(width, height, std::move(gray));
}

GrayImage decode_png(std::span<const std::uint8_t> b) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, b.data(), b.size())) {
        throw Error(ErrorCode::CorruptImage, std::string("PNG: ") + image.message);
    }
    const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
    image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
    // Alpha, if present, is composited onto black (the expected grain background).
    png_color black{0, 0, 0};
    if (!png_image_finish_read(&image, &black, buffer.data(), 0, nullptr)) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw Error(ErrorCode::CorruptImage, "PNG: " + msg);
    }
    if (image.width == 0 || image.height == 0) throw Error(ErrorCode::CorruptImage, "PNG has zero dimension");
    if (color) return rgb_to_gray(image.width, image.height, buffer);
    return GrayImage(image.width, image.height, std::move(buffer));
}

struct JpegErrorManager {
    jpeg_error_mgr base;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

void jpeg_silent(j_common_ptr, int) {}

GrayImage decode_jpeg(std::span<const std::uint8_t> b) {
    jpeg_decompress_struct cinfo;
    JpegErrorManager err;
    std::vector<std::uint8_t> buffer;
    std::size_t width = 0;
    std::size_t height = 0;
    int components = 0;

    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = jpeg_error_exit;
    err.base.emit_message = jpeg_silent;
    err.message[0] = '\0';
    // Only trivially destructible state is touched between setjmp and longjmp.
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw Error(ErrorCode::CorruptImage, std::string("JPEG: ") + err.message);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, b.data(), static_cast<unsigned long>(b.size()));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
    jpeg_start_decompress(&cinfo);
    width = cinfo.output_width;
    height = cinfo.output_height;
    components = cinfo.output_components;
    buffer.resize(width * height * static_cast<std::size_t>(components));
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = buffer.data() + static_cast<std::size_t>(cinfo.output_scanline) * width *
                                           static_cast<std::size_t>(components);
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);

    if (width == 0 || height == 0) throw Error(ErrorCode::CorruptImage, "JPEG has zero dimension");
    if (components == 3) return rgb_to_gray(width, height, buffer);
    return GrayImage(width, height, std::move(buffer));
}

}  // namespace

GrayImage decode_grayscale(std::span<const std::uint8_t> bytes) {
    if (is_pgm(bytes)) return decode_pgm(bytes);
    if (is_png(bytes)) return decode_png(bytes);
    if (is_jpeg(bytes)) return decode_jpeg(bytes);
    throw Error(ErrorCode::UnsupportedFormat, "not a PNG, JPEG or binary PGM file");
}

GrayImage load_grayscale(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        throw Error(ErrorCode::FileNotFound, path.string());
    }
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(ErrorCode::FileNotFound, path.string());
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    try {
        return decode_grayscale(bytes);
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.detail());
    }
}

}  // namespace grainscope::raster
