#include "grainscope/serialize.hpp"

#include "grainscope/csv.hpp"
#include "grainscope/error.hpp"

#include <algorithm>

namespace grainscope::serialize {

namespace {

using nlohmann::json;

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd vector_field(const json& doc, const char* key) {
    const auto values = doc.at(key).get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

// Wraps nlohmann's exceptions so callers see a single error type.
template <typename F>
auto guarded(const char* what, F&& body) {
    try {
        return body();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string(what) + ": " + e.what());
    }
}

std::uint8_t intensity_field(const json& doc, const char* key, int fallback) {
    const int v = doc.value(key, fallback);
    if (v < 0 || v > 255) throw Error(ErrorCode::ParseError, std::string(key) + " must be within 0..255");
    return static_cast<std::uint8_t>(v);
}

}  // namespace

json to_json(const pca::PcaModel& model) {
    const Eigen::Index m = model.eigenvectors.rows();
    std::vector<double> vectors;
    vectors.reserve(static_cast<std::size_t>(m * model.eigenvectors.cols()));
    for (Eigen::Index r = 0; r < m; ++r) {
        for (Eigen::Index c = 0; c < model.eigenvectors.cols(); ++c) vectors.push_back(model.eigenvectors(r, c));
    }
    return json{{"mean", to_vector(model.mean)},
                {"eigenvalues", to_vector(model.eigenvalues)},
                {"eigenvectors", vectors},
                {"retained", model.retained},
                {"standardized", model.standardized},
                {"scale", to_vector(model.scale)},
                {"feature_names", model.feature_names}};
}

pca::PcaModel pca_model_from_json(const json& doc) {
    return guarded("PCA model", [&] {
        pca::PcaModel model;
        model.mean = vector_field(doc, "mean");
        model.eigenvalues = vector_field(doc, "eigenvalues");
        const Eigen::Index m = model.mean.size();
        const auto vectors = doc.at("eigenvectors").get<std::vector<double>>();
        if (m == 0 || model.eigenvalues.size() != m || static_cast<Eigen::Index>(vectors.size()) != m * m) {
            throw Error(ErrorCode::ParseError, "PCA model: inconsistent mean/eigenvalue/eigenvector sizes");
        }
        model.eigenvectors.resize(m, m);
        for (Eigen::Index r = 0; r < m; ++r) {
            for (Eigen::Index c = 0; c < m; ++c) model.eigenvectors(r, c) = vectors[static_cast<std::size_t>(r * m + c)];
        }
        model.retained = doc.at("retained").get<Eigen::Index>();
        if (model.retained < 1 || model.retained > m) throw Error(ErrorCode::ParseError, "PCA model: retained out of range");
        model.standardized = doc.value("standardized", false);
        model.scale = doc.contains("scale") ? vector_field(doc, "scale") : Eigen::VectorXd::Ones(m);
        if (model.scale.size() != m) throw Error(ErrorCode::ParseError, "PCA model: scale has wrong length");
        model.feature_names = doc.value("feature_names", std::vector<std::string>{});
        return model;
    });
}

json to_json(const classify::ReferenceModel& model) {
    json points = json::array();
    for (const auto& p : model.points) {
        points.push_back({{"scores", to_vector(p.scores)}, {"variety", model.varieties.at(p.variety)}});
    }
    return json{{"format", "grainscope-reference"},
                {"version", 1},
                {"pca", to_json(model.pca)},
                {"k_neighbors", model.k_neighbors},
                {"varieties", model.varieties},
                {"points", points}};
}

classify::ReferenceModel reference_model_from_json(const json& doc) {
    return guarded("reference model", [&] {
        if (doc.value("format", std::string{}) != "grainscope-reference") {
            throw Error(ErrorCode::ParseError, "not a grainscope reference model");
        }
        classify::ReferenceModel model;
        model.pca = pca_model_from_json(doc.at("pca"));
        model.k_neighbors = doc.at("k_neighbors").get<std::size_t>();
        model.varieties = doc.at("varieties").get<std::vector<std::string>>();
        if (!std::is_sorted(model.varieties.begin(), model.varieties.end()) ||
            std::adjacent_find(model.varieties.begin(), model.varieties.end()) != model.varieties.end()) {
            throw Error(ErrorCode::ParseError, "reference model: varieties must be sorted and unique");
        }
        for (const auto& p : doc.at("points")) {
            classify::ReferencePoint point;
            point.scores = vector_field(p, "scores");
            if (point.scores.size() != model.pca.retained) {
                throw Error(ErrorCode::ParseError, "reference model: score length differs from retained count");
            }
            const auto name = p.at("variety").get<std::string>();
            const auto it = std::lower_bound(model.varieties.begin(), model.varieties.end(), name);
            if (it == model.varieties.end() || *it != name) {
                throw Error(ErrorCode::ParseError, "reference model: unknown variety '" + name + "'");
            }
            point.variety = static_cast<std::size_t>(it - model.varieties.begin());
            model.points.push_back(std::move(point));
        }
        if (model.points.empty() || model.k_neighbors == 0 || model.k_neighbors > model.points.size()) {
            throw Error(ErrorCode::ParseError, "reference model: k_neighbors inconsistent with point count");
        }
        return model;
    });
}

json to_json(const synth::SceneSpec& spec) {
    json grains = json::array();
    for (const auto& g : spec.grains) {
        grains.push_back({{"center_row", g.center_row},
                          {"center_col", g.center_col},
                          {"semi_major", g.semi_major},
                          {"semi_minor", g.semi_minor},
                          {"angle", g.angle},
                          {"intensity", g.intensity}});
    }
    return json{{"width", spec.width},
                {"height", spec.height},
                {"background", spec.background},
                {"noise_density", spec.noise_density},
                {"seed", spec.seed},
                {"grains", grains}};
}

synth::SceneSpec scene_spec_from_json(const json& doc) {
    return guarded("scene spec", [&] {
        synth::SceneSpec spec;
        spec.width = doc.at("width").get<std::size_t>();
        spec.height = doc.at("height").get<std::size_t>();
        spec.background = intensity_field(doc, "background", 0);
        spec.noise_density = doc.value("noise_density", 0.0);
        spec.seed = doc.value("seed", std::uint64_t{0});
        for (const auto& g : doc.value("grains", json::array())) {
            synth::GrainSpec grain;
            grain.center_row = g.at("center_row").get<double>();
            grain.center_col = g.at("center_col").get<double>();
            grain.semi_major = g.at("semi_major").get<double>();
            grain.semi_minor = g.at("semi_minor").get<double>();
            grain.angle = g.value("angle", 0.0);
            grain.intensity = intensity_field(g, "intensity", 255);
            spec.grains.push_back(grain);
        }
        return spec;
    });
}

json load_json(const std::filesystem::path& path) {
    const std::string text = csv::read_text_file(path);
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
}

}  // namespace grainscope::serialize
