// Shared test fixtures: the feature table shipped under tests/fixtures and
// synthetic variety archetypes.
#pragma once

#include "grainscope/csv.hpp"
#include "grainscope/morphology.hpp"
#include "grainscope/synth.hpp"

#include <algorithm>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace grainscope::testing {

inline std::filesystem::path fixture_path(const std::string& name) {
    return std::filesystem::path(GRAINSCOPE_FIXTURE_DIR) / name;
}

/// The 26 Classic grains of the published feature table, verbatim.
inline std::vector<morphology::GrainFeatures> classic_reference() {
    const auto path = fixture_path("classic_reference.csv");
    std::vector<morphology::GrainFeatures> out;
    for (const auto& row : csv::parse_features_csv(csv::read_text_file(path), path.string())) {
        out.push_back(row.features);
    }
    return out;
}

/// Gaussian draw from raw engine output (Box-Muller), identical on every platform.
inline double normal(std::mt19937_64& rng, double mean, double sd) {
    const double u1 = 1.0 - synth::uniform_unit(rng);
    const double u2 = synth::uniform_unit(rng);
    return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

/// Variety archetype: semi-axis distributions. "Classic" follows the published
/// table's envelope (major ~178 +/- 14 px, minor ~42.6 +/- 3.8 px); the other two
/// are the same shape scaled by +/-15%.
struct Archetype {
    std::string name;
    double semi_major_mean;
    double semi_major_sd;
    double semi_minor_mean;
    double semi_minor_sd;

    synth::GrainSpec draw(std::mt19937_64& rng) const {
        synth::GrainSpec g;
        g.semi_major = std::max(4.0, normal(rng, semi_major_mean, semi_major_sd));
        g.semi_minor = std::clamp(normal(rng, semi_minor_mean, semi_minor_sd), 3.0, g.semi_major);
        g.intensity = static_cast<std::uint8_t>(170 + synth::uniform_index(rng, 71));
        return g;
    }
};

inline std::vector<Archetype> variety_archetypes() {
    const Archetype classic{"Classic", 89.0, 7.0, 21.3, 1.9};
    auto scaled = [&](std::string name, double s) {
        return Archetype{std::move(name), classic.semi_major_mean * s, classic.semi_major_sd * s,
                         classic.semi_minor_mean * s, classic.semi_minor_sd * s};
    };
    return {classic, scaled("Mini", 0.85), scaled("Rozana", 1.15)};
}

/// Square scene side large enough to scatter `count` grains of the archetype
/// at roughly 20% coverage.
inline std::size_t scene_side(const Archetype& a, std::size_t count) {
    const double grain_area = 3.14159265358979323846 * a.semi_major_mean * 1.2 * a.semi_minor_mean * 1.2;
    const double side = std::sqrt(static_cast<double>(count) * grain_area / 0.2) + 3.0 * a.semi_major_mean;
    return static_cast<std::size_t>(side);
}

}  // namespace grainscope::testing
