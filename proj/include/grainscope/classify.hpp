/**
 * @file classify.hpp
 * @brief K-nearest-neighbour variety classification in principal-component space.
 *
 * One PCA is fitted on the pooled training grains of every variety; each grain's
 * score vector becomes a labeled reference point. A sample (one image's grains)
 * is classified by majority vote over its per-grain K-NN verdicts.
 */
#pragma once

#include "grainscope/morphology.hpp"
#include "grainscope/pca.hpp"

#include <span>
#include <string>
#include <vector>

namespace grainscope::classify {

struct LabeledGrain {
    morphology::GrainFeatures features;
    std::string variety;
};

struct ReferencePoint {
    Eigen::VectorXd scores;
    std::size_t variety = 0;  ///< index into ReferenceModel::varieties
};

/// Immutable after build_reference(); safe to share between threads.
struct ReferenceModel {
    pca::PcaModel pca;
    std::vector<ReferencePoint> points;
    std::vector<std::string> varieties;  ///< sorted; also the final tie-break order
    std::size_t k_neighbors = 5;
};

struct ReferenceOptions {
    pca::ComponentChoice components;
    bool standardize = false;
    std::size_t k_neighbors = 5;
};

/// Throws TooFewVarieties (< 2 labels), TooFewGrains (fewer grains than k_neighbors)
/// or InvalidArgument (k_neighbors zero or even).
ReferenceModel build_reference(std::span<const LabeledGrain> labeled, const ReferenceOptions& options = {});

struct GrainVerdict {
    std::size_t variety = 0;
    std::vector<double> distances;  ///< k nearest, ascending
};

/// Votes among the k nearest reference points to `scores` (Euclidean).
/// Majority wins; ties go to the smaller summed neighbour distance, then to the
/// earlier variety.
GrainVerdict vote(const ReferenceModel& model, const Eigen::VectorXd& scores);

/// Projects `f` with the model's PCA, then vote().
GrainVerdict classify_grain(const ReferenceModel& model, const morphology::GrainFeatures& f);

struct GrainResult {
    morphology::GrainFeatures features;
    Eigen::VectorXd scores;
    std::size_t predicted = 0;
    std::vector<double> neighbor_distances;
};

struct SampleReport {
    std::string sample_id;
    std::size_t grain_count = 0;
    std::vector<GrainResult> per_grain;
    std::size_t majority = 0;
    std::vector<double> vote_fractions;  ///< aligned with ReferenceModel::varieties
    Eigen::VectorXd mean_scores;
    double elapsed_seconds = 0.0;
};

/// Per-grain K-NN plus a sample-level majority vote. Ties between labels go to
/// the smaller total neighbour distance of the grains voting for them, then to
/// the earlier variety. Throws EmptySample.
SampleReport classify_sample(const ReferenceModel& model, std::span<const morphology::GrainFeatures> grains,
                             std::string sample_id);

struct LabeledSample {
    std::string sample_id;
    std::vector<morphology::GrainFeatures> grains;
    std::string truth;
};

struct AccuracyRow {
    std::string variety;
    std::size_t samples = 0;
    std::size_t correct = 0;

    double accuracy() const { return samples == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(samples); }
    /// Integer percentage, rounded half-up (11/14 -> 79).
    unsigned percent() const;
};

struct AccuracyTable {
    std::vector<AccuracyRow> per_variety;
    AccuracyRow overall{"Overall"};
};

struct Evaluation {
    std::vector<SampleReport> reports;  ///< in input order
    std::vector<std::string> truths;
    AccuracyTable table;
};

/// Classifies every sample and tallies accuracy per true variety. Rows follow
/// the model's variety order; truths unknown to the model come last, sorted.
/// Throws EmptyTestSet.
Evaluation evaluate(const ReferenceModel& model, std::span<const LabeledSample> samples);

/// Pure tally used by evaluate(); exposed for table-only workflows.
AccuracyTable tally(const std::vector<std::string>& model_varieties, std::span<const std::string> predicted,
                    std::span<const std::string> truth);

}  // namespace grainscope::classify
