#include "grainscope/segment.hpp"

#include "grainscope/error.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <array>
#include <limits>

namespace grainscope::segment {

namespace {

using boost::multiprecision::int256_t;

constexpr std::array<std::array<int, 2>, 8> kNeighbors8 = {{
    {-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1},
}};

}  // namespace

std::uint32_t LabelMap::at_or_background(std::ptrdiff_t row, std::ptrdiff_t col) const {
    if (row < 0 || col < 0 || row >= static_cast<std::ptrdiff_t>(height) ||
        col >= static_cast<std::ptrdiff_t>(width)) {
        return 0;
    }
    return labels[static_cast<std::size_t>(row) * width + static_cast<std::size_t>(col)];
}

std::uint8_t otsu_threshold(const raster::GrayImage& img) {
    std::array<std::int64_t, 256> hist{};
    for (auto v : img.pixels()) ++hist[v];

    int occupied = 0;
    std::int64_t total_count = 0;
    std::int64_t total_sum = 0;
    for (int v = 0; v < 256; ++v) {
        if (hist[v] != 0) ++occupied;
        total_count += hist[v];
        total_sum += hist[v] * v;
    }
    if (occupied < 2) {
        throw Error(ErrorCode::NoContrast, "histogram has a single occupied bin");
    }

    // Between-class variance is (s0*n1 - s1*n0)^2 / (n0*n1*N^2). N^2 is common to
    // every candidate, so candidates compare exactly as the rationals D^2/(n0*n1).
    int256_t best_num = -1;
    int256_t best_den = 1;
    int best_t = 0;
    std::int64_t n0 = 0;
    std::int64_t s0 = 0;
    for (int t = 0; t < 256; ++t) {
        n0 += hist[t];
        s0 += hist[t] * t;
        const std::int64_t n1 = total_count - n0;
        const std::int64_t s1 = total_sum - s0;
        if (n0 == 0 || n1 == 0) continue;
        const int256_t d = int256_t(s0) * n1 - int256_t(s1) * n0;
        const int256_t num = d * d;
        const int256_t den = int256_t(n0) * n1;
        if (best_num < 0 || num * best_den > best_num * den) {
            best_num = num;
            best_den = den;
            best_t = t;
        }
    }
    return static_cast<std::uint8_t>(best_t);
}

BinaryImage binarize(const raster::GrayImage& img, std::uint8_t t) {
    BinaryImage bin{img.width(), img.height(), std::vector<bool>(img.size())};
    const auto px = img.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) bin.mask[i] = px[i] > t;
    return bin;
}

Labeling label_components(const BinaryImage& bin, std::size_t min_area, BorderPolicy border) {
    const std::size_t w = bin.width;
    const std::size_t h = bin.height;
    if (bin.mask.size() != w * h) {
        throw Error(ErrorCode::InvalidArgument, "mask length does not match width * height");
    }

    // Pass 1: provisional labels via iterative flood fill, discovered in raster order.
    std::vector<std::uint32_t> provisional(w * h, 0);
    std::vector<std::size_t> sizes{0};
    std::vector<bool> touches_border{false};
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < w * h; ++start) {
        if (!bin.mask[start] || provisional[start] != 0) continue;
        const auto id = static_cast<std::uint32_t>(sizes.size());
        sizes.push_back(0);
        touches_border.push_back(false);
        provisional[start] = id;
        stack.push_back(start);
        while (!stack.empty()) {
            const std::size_t idx = stack.back();
            stack.pop_back();
            ++sizes[id];
            const auto r = static_cast<std::ptrdiff_t>(idx / w);
            const auto c = static_cast<std::ptrdiff_t>(idx % w);
            if (r == 0 || c == 0 || r + 1 == static_cast<std::ptrdiff_t>(h) ||
                c + 1 == static_cast<std::ptrdiff_t>(w)) {
                touches_border[id] = true;
            }
            for (const auto& [dr, dc] : kNeighbors8) {
                const auto nr = r + dr;
                const auto nc = c + dc;
                if (nr < 0 || nc < 0 || nr >= static_cast<std::ptrdiff_t>(h) ||
                    nc >= static_cast<std::ptrdiff_t>(w)) {
                    continue;
                }
                const std::size_t n = static_cast<std::size_t>(nr) * w + static_cast<std::size_t>(nc);
                if (bin.mask[n] && provisional[n] == 0) {
                    provisional[n] = id;
                    stack.push_back(n);
                }
            }
        }
    }

    // Pass 2: filter and renumber. Provisional ids already follow first-pixel raster order.
    std::vector<std::uint32_t> final_id(sizes.size(), 0);
    std::uint32_t count = 0;
    for (std::size_t id = 1; id < sizes.size(); ++id) {
        const bool keep = sizes[id] >= min_area && !(border == BorderPolicy::Exclude && touches_border[id]);
        if (keep) final_id[id] = ++count;
    }

    Labeling out;
    out.map = LabelMap{w, h, std::vector<std::uint32_t>(w * h, 0), count};
    out.regions.resize(count);
    for (std::uint32_t k = 0; k < count; ++k) {
        out.regions[k].label = k + 1;
        out.regions[k].bounding_box = {std::numeric_limits<std::int32_t>::max(),
                                       std::numeric_limits<std::int32_t>::max(), -1, -1};
    }
    for (std::size_t id = 1; id < sizes.size(); ++id) {
        if (final_id[id] != 0) out.regions[final_id[id] - 1].pixels.reserve(sizes[id]);
    }
    for (std::size_t idx = 0; idx < w * h; ++idx) {
        const std::uint32_t label = final_id[provisional[idx]];
        if (label == 0) continue;
        out.map.labels[idx] = label;
        Region& region = out.regions[label - 1];
        const Pixel p{static_cast<std::int32_t>(idx / w), static_cast<std::int32_t>(idx % w)};
        region.pixels.push_back(p);
        auto& bb = region.bounding_box;
        bb.min_row = std::min(bb.min_row, p.row);
        bb.min_col = std::min(bb.min_col, p.col);
        bb.max_row = std::max(bb.max_row, p.row);
        bb.max_col = std::max(bb.max_col, p.col);
    }
    return out;
}

raster::GrayImage label_visualization(const LabelMap& map) {
    std::vector<std::uint8_t> data(map.labels.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto l = map.labels[i];
        data[i] = l == 0 ? 0 : static_cast<std::uint8_t>(l % 255 + 1);
    }
    return raster::GrayImage(map.width, map.height, std::move(data));
}

}  // namespace grainscope::segment
