#include "grainscope/classify.hpp"

#include "grainscope/error.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <numeric>
#include <set>

namespace grainscope::classify {

namespace {

Eigen::MatrixXd feature_column(const morphology::GrainFeatures& f) {
    const auto values = f.as_array();
    Eigen::MatrixXd col(static_cast<Eigen::Index>(values.size()), 1);
    for (std::size_t i = 0; i < values.size(); ++i) col(static_cast<Eigen::Index>(i), 0) = values[i];
    return col;
}

// Highest count, then smallest distance total, then lowest index.
std::size_t pick_label(const std::vector<std::size_t>& counts, const std::vector<double>& distance_totals) {
    std::size_t best = 0;
    for (std::size_t v = 1; v < counts.size(); ++v) {
        if (counts[v] > counts[best] || (counts[v] == counts[best] && distance_totals[v] < distance_totals[best])) {
            best = v;
        }
    }
    return best;
}

}  // namespace

unsigned AccuracyRow::percent() const {
    if (samples == 0) return 0;
    return static_cast<unsigned>((200 * correct + samples) / (2 * samples));
}

ReferenceModel build_reference(std::span<const LabeledGrain> labeled, const ReferenceOptions& options) {
    if (options.k_neighbors == 0 || options.k_neighbors % 2 == 0) {
        throw Error(ErrorCode::InvalidArgument,
                    "k_neighbors must be odd and positive, got " + std::to_string(options.k_neighbors));
    }
    std::set<std::string> names;
    for (const auto& g : labeled) names.insert(g.variety);
    if (names.size() < 2) {
        throw Error(ErrorCode::TooFewVarieties, "need at least 2 varieties, got " + std::to_string(names.size()));
    }
    if (labeled.size() < options.k_neighbors) {
        throw Error(ErrorCode::TooFewGrains, std::to_string(labeled.size()) + " grains for k_neighbors=" +
                                                 std::to_string(options.k_neighbors));
    }

    ReferenceModel model;
    model.varieties.assign(names.begin(), names.end());
    model.k_neighbors = options.k_neighbors;

    // Canonical order makes the fitted model independent of input order, bit for bit.
    std::vector<const LabeledGrain*> ordered;
    ordered.reserve(labeled.size());
    for (const auto& g : labeled) ordered.push_back(&g);
    std::stable_sort(ordered.begin(), ordered.end(), [](const LabeledGrain* a, const LabeledGrain* b) {
        if (a->variety != b->variety) return a->variety < b->variety;
        return a->features.as_array() < b->features.as_array();
    });

    Eigen::MatrixXd x(static_cast<Eigen::Index>(morphology::kFeatureNames.size()),
                      static_cast<Eigen::Index>(ordered.size()));
    for (std::size_t n = 0; n < ordered.size(); ++n) {
        x.col(static_cast<Eigen::Index>(n)) = feature_column(ordered[n]->features);
    }
    pca::FitOptions fit_options;
    fit_options.components = options.components;
    fit_options.standardize = options.standardize;
    fit_options.feature_names.assign(morphology::kFeatureNames.begin(), morphology::kFeatureNames.end());
    model.pca = pca::fit(pca::DataMatrix(x), fit_options);

    const Eigen::MatrixXd scores = pca::transform(model.pca, x);
    model.points.reserve(ordered.size());
    for (std::size_t n = 0; n < ordered.size(); ++n) {
        const auto it = std::lower_bound(model.varieties.begin(), model.varieties.end(), ordered[n]->variety);
        model.points.push_back({scores.col(static_cast<Eigen::Index>(n)),
                                static_cast<std::size_t>(it - model.varieties.begin())});
    }
    return model;
}

GrainVerdict vote(const ReferenceModel& model, const Eigen::VectorXd& scores) {
    const std::size_t k = model.k_neighbors;
    if (k == 0 || k > model.points.size()) {
        throw Error(ErrorCode::TooFewGrains, "model holds " + std::to_string(model.points.size()) +
                                                 " points for k_neighbors=" + std::to_string(k));
    }
    struct Candidate {
        double distance;
        std::size_t variety;
    };
    std::vector<Candidate> candidates;
    candidates.reserve(model.points.size());
    for (const auto& p : model.points) {
        if (p.scores.size() != scores.size()) {
            throw Error(ErrorCode::DimensionMismatch, "score vector length differs from reference points");
        }
        candidates.push_back({(p.scores - scores).norm(), p.variety});
    }
    // (distance, variety) ordering: which of several equidistant points enter
    // the neighbourhood depends only on their labels, never on storage order.
    const auto by_distance = [](const Candidate& a, const Candidate& b) {
        return a.distance != b.distance ? a.distance < b.distance : a.variety < b.variety;
    };
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k), candidates.end(),
                      by_distance);

    std::vector<std::size_t> counts(model.varieties.size(), 0);
    std::vector<double> totals(model.varieties.size(), 0.0);
    GrainVerdict verdict;
    verdict.distances.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        ++counts[candidates[i].variety];
        totals[candidates[i].variety] += candidates[i].distance;
        verdict.distances.push_back(candidates[i].distance);
    }
    verdict.variety = pick_label(counts, totals);
    return verdict;
}

GrainVerdict classify_grain(const ReferenceModel& model, const morphology::GrainFeatures& f) {
    const Eigen::MatrixXd scores = pca::transform(model.pca, feature_column(f));
    return vote(model, scores.col(0));
}

SampleReport classify_sample(const ReferenceModel& model, std::span<const morphology::GrainFeatures> grains,
                             std::string sample_id) {
    if (grains.empty()) throw Error(ErrorCode::EmptySample, "sample '" + sample_id + "' has no grains");
    const auto started = std::chrono::steady_clock::now();

    SampleReport report;
    report.sample_id = std::move(sample_id);
    report.grain_count = grains.size();
    report.per_grain.reserve(grains.size());
    report.mean_scores = Eigen::VectorXd::Zero(model.pca.retained);

    std::vector<std::size_t> counts(model.varieties.size(), 0);
    std::vector<double> totals(model.varieties.size(), 0.0);
    for (const auto& f : grains) {
        GrainResult result;
        result.features = f;
        result.scores = pca::transform(model.pca, feature_column(f)).col(0);
        GrainVerdict verdict = vote(model, result.scores);
        result.predicted = verdict.variety;
        result.neighbor_distances = std::move(verdict.distances);

        ++counts[result.predicted];
        totals[result.predicted] +=
            std::accumulate(result.neighbor_distances.begin(), result.neighbor_distances.end(), 0.0);
        report.mean_scores += result.scores;
        report.per_grain.push_back(std::move(result));
    }
    const auto n = static_cast<double>(grains.size());
    report.mean_scores /= n;
    report.majority = pick_label(counts, totals);
    report.vote_fractions.resize(counts.size());
    for (std::size_t v = 0; v < counts.size(); ++v) report.vote_fractions[v] = static_cast<double>(counts[v]) / n;

    report.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

AccuracyTable tally(const std::vector<std::string>& model_varieties, std::span<const std::string> predicted,
                    std::span<const std::string> truth) {
    if (predicted.size() != truth.size()) {
        throw Error(ErrorCode::DimensionMismatch, "prediction and truth counts differ");
    }
    if (truth.empty()) throw Error(ErrorCode::EmptyTestSet, "no test samples");

    std::map<std::string, AccuracyRow> rows;
    AccuracyTable table;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        auto& row = rows[truth[i]];
        row.variety = truth[i];
        ++row.samples;
        ++table.overall.samples;
        if (predicted[i] == truth[i]) {
            ++row.correct;
            ++table.overall.correct;
        }
    }
    for (const auto& name : model_varieties) {
        if (auto it = rows.find(name); it != rows.end()) {
            table.per_variety.push_back(it->second);
            rows.erase(it);
        }
    }
    for (auto& [name, row] : rows) table.per_variety.push_back(row);
    return table;
}

Evaluation evaluate(const ReferenceModel& model, std::span<const LabeledSample> samples) {
    if (samples.empty()) throw Error(ErrorCode::EmptyTestSet, "no test samples");
    Evaluation out;
    std::vector<std::string> predicted;
    for (const auto& s : samples) {
        out.reports.push_back(classify_sample(model, s.grains, s.sample_id));
        predicted.push_back(model.varieties[out.reports.back().majority]);
        out.truths.push_back(s.truth);
    }
    out.table = tally(model.varieties, predicted, out.truths);
    return out;
}

}  // namespace grainscope::classify
