/**
 * @file serialize.hpp
 * @brief JSON documents for PCA models, reference models and scene specs.
 *
 * PcaModel:
 *   {"mean": [...], "eigenvalues": [...], "eigenvectors": [row-major M*M],
 *    "retained": k, "standardized": bool, "scale": [...], "feature_names": [...]}
 * Doubles are written in shortest round-trip form, so parsing restores them exactly.
 */
#pragma once

#include "grainscope/classify.hpp"
#include "grainscope/pca.hpp"
#include "grainscope/synth.hpp"

#include "json.hpp"

#include <filesystem>

namespace grainscope::serialize {

nlohmann::json to_json(const pca::PcaModel& model);
pca::PcaModel pca_model_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const classify::ReferenceModel& model);
classify::ReferenceModel reference_model_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const synth::SceneSpec& spec);
synth::SceneSpec scene_spec_from_json(const nlohmann::json& doc);

/// Reads and parses a JSON file; ParseError on malformed text.
nlohmann::json load_json(const std::filesystem::path& path);

}  // namespace grainscope::serialize
