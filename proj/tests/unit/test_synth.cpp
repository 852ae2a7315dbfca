#include "grainscope/error.hpp"
#include "grainscope/pipeline.hpp"
#include "grainscope/synth.hpp"
#include "support/fixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

namespace grainscope::synth {
namespace {

constexpr double kPi = 3.14159265358979323846;

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected grainscope::Error";
    return ErrorCode::IoError;
}

SceneSpec single_grain(double a, double b, double angle = 0.0) {
    SceneSpec spec;
    spec.width = 512;
    spec.height = 512;
    spec.grains.push_back({256, 256, a, b, angle, 255});
    return spec;
}

std::size_t count_value(const raster::GrayImage& img, std::uint8_t v) {
    std::size_t n = 0;
    for (auto p : img.pixels()) n += p == v;
    return n;
}

TEST(RenderScene, SingleEllipseArea) {
    const auto scene = render_scene(single_grain(80, 22));
    const double expected = kPi * 80 * 22;  // 5529.2
    EXPECT_NEAR(static_cast<double>(count_value(scene.image, 255)), expected, 0.02 * expected);
    ASSERT_EQ(scene.truth.size(), 1u);
    EXPECT_NEAR(scene.truth[0].area, expected, 1e-9);
    EXPECT_NEAR(scene.truth[0].eccentricity, std::sqrt(1 - (22.0 / 80) * (22.0 / 80)), 1e-15);
}

TEST(RenderScene, EmptySceneIsBackground) {
    SceneSpec spec;
    spec.width = 40;
    spec.height = 30;
    spec.background = 17;
    const auto scene = render_scene(spec);
    EXPECT_EQ(scene.image, raster::GrayImage(40, 30, 17));
    EXPECT_TRUE(scene.truth.empty());
}

TEST(RenderScene, CircleHasZeroEccentricity) {
    const auto scene = render_scene(single_grain(30, 30));
    EXPECT_EQ(scene.truth[0].eccentricity, 0.0);
}

TEST(Rasterize, PixelCenterRule) {
    // Unit circle at a pixel center covers the center and its 4 axial neighbours.
    const auto px = rasterize({5, 5, 1.0, 1.0, 0.0, 255});
    const std::vector<segment::Pixel> expected{{4, 5}, {5, 4}, {5, 5}, {5, 6}, {6, 5}};
    EXPECT_EQ(px, expected);
}

TEST(Rasterize, AngleRotatesTowardRows) {
    const auto flat = rasterize({50, 50, 20, 3, 0.0, 255});
    const auto turned = rasterize({50, 50, 20, 3, kPi / 2, 255});
    std::set<std::pair<std::size_t, std::size_t>> a, b;
    for (const auto& p : flat) a.insert({p.row, p.col});
    for (const auto& p : turned) b.insert({p.col, p.row});
    EXPECT_EQ(a, b);
    EXPECT_TRUE(a.count({50, 69}));
}

TEST(RenderScene, Errors) {
    EXPECT_EQ(code_of([] { render_scene(single_grain(300, 10)); }), ErrorCode::GrainOutOfBounds);
    auto two = single_grain(20, 10);
    two.grains.push_back({256, 270, 20, 10, 0.0, 200});
    EXPECT_EQ(code_of([&] { render_scene(two); }), ErrorCode::GrainsOverlap);
    auto bad = single_grain(10, 20);
    EXPECT_EQ(code_of([&] { render_scene(bad); }), ErrorCode::InvalidArgument);
    auto noisy = single_grain(20, 10);
    noisy.noise_density = 1.0;
    EXPECT_EQ(code_of([&] { render_scene(noisy); }), ErrorCode::BadDensity);
}

TEST(RenderScene, TouchingFootprintsCountAsOverlap) {
    // Circles of radius 2 at cols 10 and 15: footprints end at cols 12 and 13.
    SceneSpec spec;
    spec.width = 30;
    spec.height = 30;
    spec.grains = {{10, 10, 2, 2, 0, 255}, {10, 15, 2, 2, 0, 255}};
    EXPECT_EQ(code_of([&] { render_scene(spec); }), ErrorCode::GrainsOverlap);
    spec.grains[1].center_col = 16;
    EXPECT_NO_THROW(render_scene(spec));
}

TEST(SaltPepper, ZeroDensityIsIdentity) {
    const raster::GrayImage img(20, 20, 128);
    EXPECT_EQ(add_salt_pepper(img, 0.0, 5), img);
}

TEST(SaltPepper, ExactCountOnMidGray) {
    const raster::GrayImage img(100, 100, 128);
    const auto noisy = add_salt_pepper(img, 0.05, 7);
    EXPECT_EQ(count_value(noisy, 0) + count_value(noisy, 255), 500u);
    EXPECT_EQ(count_value(noisy, 128), 9500u);
    EXPECT_GT(count_value(noisy, 0), 150u);
    EXPECT_GT(count_value(noisy, 255), 150u);
}

TEST(SaltPepper, DeterministicPerSeed) {
    const raster::GrayImage img(64, 48, 90);
    EXPECT_EQ(add_salt_pepper(img, 0.1, 3), add_salt_pepper(img, 0.1, 3));
    EXPECT_NE(add_salt_pepper(img, 0.1, 3), add_salt_pepper(img, 0.1, 4));
}

TEST(SaltPepper, BadDensity) {
    const raster::GrayImage img(4, 4, 0);
    EXPECT_EQ(code_of([&] { add_salt_pepper(img, -0.1, 1); }), ErrorCode::BadDensity);
    EXPECT_EQ(code_of([&] { add_salt_pepper(img, 1.0, 1); }), ErrorCode::BadDensity);
    EXPECT_EQ(code_of([&] { add_salt_pepper(img, std::nan(""), 1); }), ErrorCode::BadDensity);
}

TEST(UniformIndex, RangeAndCoverage) {
    std::mt19937_64 rng(1);
    std::vector<int> hits(7, 0);
    for (int i = 0; i < 7000; ++i) {
        const auto v = uniform_index(rng, 7);
        ASSERT_LT(v, 7u);
        ++hits[v];
    }
    for (int h : hits) EXPECT_NEAR(h, 1000, 150);
    for (int i = 0; i < 1000; ++i) {
        const double u = uniform_unit(rng);
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(ScatterGrains, PlacesAllAndRenders) {
    const auto archetype = testing::variety_archetypes()[0];
    const std::size_t side = testing::scene_side(archetype, 20);
    const auto spec = scatter_grains(side, side, 20, [&](std::mt19937_64& r) { return archetype.draw(r); }, 42);
    EXPECT_EQ(spec.grains.size(), 20u);
    EXPECT_NO_THROW(render_scene(spec));
    EXPECT_EQ(spec, scatter_grains(side, side, 20, [&](std::mt19937_64& r) { return archetype.draw(r); }, 42));
}

TEST(ScatterGrains, ImpossiblePlacement) {
    EXPECT_EQ(code_of([] {
                  scatter_grains(20, 20, 5, [](std::mt19937_64&) { return GrainSpec{0, 0, 8, 8, 0, 255}; }, 1, 2, 200);
              }),
              ErrorCode::InvalidArgument);
}

TEST(RenderScene, Deterministic) {
    auto spec = single_grain(60, 20, 0.7);
    spec.noise_density = 0.05;
    spec.seed = 99;
    EXPECT_EQ(render_scene(spec).image, render_scene(spec).image);
}

// Render, segment and measure: recovered features track the analytic truth.
TEST(SynthProperty, PipelineRecoversGroundTruth) {
    const auto archetypes = testing::variety_archetypes();
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const auto& archetype = archetypes[seed % archetypes.size()];
        const std::size_t count = 8;
        const std::size_t side = testing::scene_side(archetype, count);
        auto spec = scatter_grains(side, side, count, [&](std::mt19937_64& r) { return archetype.draw(r); }, seed);
        spec.noise_density = 0.05;
        spec.seed = seed;
        const auto scene = render_scene(spec);
        const auto analysis = analyze_image(scene.image);
        ASSERT_EQ(analysis.features.size(), count) << "seed " << seed;
        for (const auto& truth : scene.truth) {
            // Match by nearest centroid.
            std::size_t best = 0;
            double best_d = 1e300;
            for (std::size_t i = 0; i < analysis.labeling.regions.size(); ++i) {
                const auto m = morphology::central_moments(analysis.labeling.regions[i]);
                const double d = std::hypot(m.centroid_row - truth.grain.center_row,
                                            m.centroid_col - truth.grain.center_col);
                if (d < best_d) {
                    best_d = d;
                    best = i;
                }
            }
            EXPECT_LT(best_d, 1.0);
            const auto& f = analysis.features[best];
            EXPECT_NEAR(f.area, truth.area, 0.04 * truth.area);
            EXPECT_NEAR(f.eccentricity, truth.eccentricity, 0.02);
        }
    }
}

}  // namespace
}  // namespace grainscope::synth
