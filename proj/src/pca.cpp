#include "grainscope/pca.hpp"

#include "grainscope/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace grainscope::pca {

namespace {

constexpr int kMaxSweeps = 100;
constexpr double kOffDiagonalTolerance = 1e-12;
constexpr double kSymmetryTolerance = 1e-9;

std::string shape(const Eigen::MatrixXd& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

// Largest-magnitude entry made positive; the lowest index wins exact ties.
void canonicalize_sign(Eigen::Ref<Eigen::VectorXd> v) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i) {
        if (std::abs(v[i]) > std::abs(v[best])) best = i;
    }
    if (v[best] < 0.0) v = -v;
}

}  // namespace

DataMatrix::DataMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
    if (values_.rows() < 1 || values_.cols() < 1) {
        throw Error(ErrorCode::InvalidArgument, "data matrix must be at least 1x1, got " + shape(values_));
    }
    if (!values_.allFinite()) {
        throw Error(ErrorCode::InvalidArgument, "data matrix contains non-finite values");
    }
}

Eigen::VectorXd empirical_mean(const DataMatrix& x) {
    // Shifted by the first column: exact for constant rows, tighter otherwise.
    const Eigen::VectorXd shift = x.values().col(0);
    return shift + (x.values().colwise() - shift).rowwise().sum() / static_cast<double>(x.observations());
}

CenteredMatrix mean_subtract(const DataMatrix& x, const Eigen::VectorXd& u) {
    if (u.size() != x.features()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "mean has " + std::to_string(u.size()) + " entries for " + std::to_string(x.features()) +
                        " features");
    }
    return CenteredMatrix(x.values().colwise() - u);
}

Eigen::MatrixXd covariance(const CenteredMatrix& b) {
    const auto& m = b.values();
    Eigen::MatrixXd c = (m * m.transpose()) / static_cast<double>(m.cols());
    // Exact symmetry regardless of how the product was accumulated.
    return (c + c.transpose()) * 0.5;
}

EigenDecomposition eig_symmetric(const Eigen::MatrixXd& c) {
    if (c.rows() != c.cols() || c.rows() < 1) {
        throw Error(ErrorCode::DimensionMismatch, "eigendecomposition needs a square matrix, got " + shape(c));
    }
    if (!c.allFinite()) throw Error(ErrorCode::InvalidArgument, "matrix contains non-finite values");
    const double norm = c.norm();
    const double asymmetry = (c - c.transpose()).cwiseAbs().maxCoeff();
    if (asymmetry > kSymmetryTolerance * norm) {
        throw Error(ErrorCode::NotSymmetric, "max |C - C^T| = " + std::to_string(asymmetry));
    }

    const Eigen::Index n = c.rows();
    Eigen::MatrixXd a = (c + c.transpose()) * 0.5;
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
    const double tolerance = kOffDiagonalTolerance * norm;

    auto max_off_diagonal = [&] {
        double worst = 0.0;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) worst = std::max(worst, std::abs(a(p, q)));
        }
        return worst;
    };

    int sweeps = 0;
    while (max_off_diagonal() >= tolerance && norm > 0.0) {
        if (sweeps == kMaxSweeps) {
            throw Error(ErrorCode::NoConvergence, "Jacobi did not converge in " + std::to_string(kMaxSweeps) + " sweeps");
        }
        ++sweeps;
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) < tolerance) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t;
                if (std::abs(theta) > 1e150) {
                    t = 0.5 / theta;
                } else {
                    t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                    if (theta < 0.0) t = -t;
                }
                const double cs = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * cs;

                for (Eigen::Index k = 0; k < n; ++k) {
                    if (k == p || k == q) continue;
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = a(p, k) = cs * akp - sn * akq;
                    a(k, q) = a(q, k) = sn * akp + cs * akq;
                }
                a(p, p) -= t * apq;
                a(q, q) += t * apq;
                a(p, q) = a(q, p) = 0.0;

                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = cs * vkp - sn * vkq;
                    v(k, q) = sn * vkp + cs * vkq;
                }
            }
        }
    }

    EigenDecomposition out{a.diagonal(), std::move(v), sweeps};
    for (Eigen::Index j = 0; j < n; ++j) canonicalize_sign(out.vectors.col(j));
    return out;
}

EigenDecomposition sort_components(EigenDecomposition eig) {
    if (eig.values.size() != eig.vectors.cols()) {
        throw Error(ErrorCode::DimensionMismatch,
                    std::to_string(eig.values.size()) + " eigenvalues for " + std::to_string(eig.vectors.cols()) +
                        " eigenvectors");
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(eig.values.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index i, Eigen::Index j) { return eig.values[i] > eig.values[j]; });
    EigenDecomposition sorted{Eigen::VectorXd(eig.values.size()), Eigen::MatrixXd(eig.vectors.rows(), eig.vectors.cols()),
                              eig.sweeps};
    for (std::size_t j = 0; j < order.size(); ++j) {
        const auto dst = static_cast<Eigen::Index>(j);
        sorted.values[dst] = eig.values[order[j]];
        sorted.vectors.col(dst) = eig.vectors.col(order[j]);
    }
    return sorted;
}

Eigen::MatrixXd select_components(const EigenDecomposition& sorted, Eigen::Index k) {
    if (k < 1 || k > sorted.vectors.cols()) {
        throw Error(ErrorCode::BadK, "k=" + std::to_string(k) + " outside [1, " +
                                         std::to_string(sorted.vectors.cols()) + "]");
    }
    return sorted.vectors.leftCols(k);
}

Eigen::MatrixXd project(const Eigen::MatrixXd& feature_vector, const CenteredMatrix& b) {
    if (feature_vector.rows() != b.values().rows()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "feature vector " + shape(feature_vector) + " cannot project data " + shape(b.values()));
    }
    return feature_vector.transpose() * b.values();
}

Eigen::Index components_for_variance(const Eigen::VectorXd& sorted_eigenvalues, double target) {
    const Eigen::Index m = sorted_eigenvalues.size();
    if (m == 0) throw Error(ErrorCode::BadK, "empty spectrum");
    // Tiny negative round-off eigenvalues carry no variance.
    const Eigen::VectorXd positive = sorted_eigenvalues.cwiseMax(0.0);
    const double total = positive.sum();
    if (total <= 0.0) return 1;
    double cumulative = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
        cumulative += positive[k];
        if (cumulative / total >= target) return k + 1;
    }
    return m;
}

PcaModel fit(const DataMatrix& x, const FitOptions& options) {
    if (x.observations() < 2) {
        throw Error(ErrorCode::TooFewObservations,
                    "PCA needs at least 2 observations, got " + std::to_string(x.observations()));
    }
    const Eigen::Index m = x.features();
    if (!options.feature_names.empty() && static_cast<Eigen::Index>(options.feature_names.size()) != m) {
        throw Error(ErrorCode::DimensionMismatch, "feature name count does not match feature count");
    }

    PcaModel model;
    model.mean = empirical_mean(x);
    model.standardized = options.standardize;
    model.scale = Eigen::VectorXd::Ones(m);
    model.feature_names = options.feature_names;

    CenteredMatrix b = mean_subtract(x, model.mean);
    if (options.standardize) {
        const Eigen::VectorXd sd =
            (b.values().array().square().rowwise().sum() / static_cast<double>(x.observations())).sqrt();
        for (Eigen::Index i = 0; i < m; ++i) model.scale[i] = sd[i] > 0.0 ? sd[i] : 1.0;
        b = CenteredMatrix(b.values().array().colwise() / model.scale.array());
    }

    const EigenDecomposition sorted = sort_components(eig_symmetric(covariance(b)));
    model.eigenvalues = sorted.values;
    model.eigenvectors = sorted.vectors;
    model.retained = options.components.k ? *options.components.k
                                          : components_for_variance(sorted.values, options.components.variance_target);
    // Validates k.
    select_components(sorted, model.retained);
    return model;
}

Eigen::MatrixXd transform(const PcaModel& model, const Eigen::MatrixXd& x_new) {
    if (x_new.rows() != model.mean.size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "model expects " + std::to_string(model.mean.size()) + " features, data is " + shape(x_new));
    }
    const Eigen::MatrixXd centered = (x_new.colwise() - model.mean).array().colwise() / model.scale.array();
    return model.eigenvectors.leftCols(model.retained).transpose() * centered;
}

Eigen::MatrixXd inverse_transform(const PcaModel& model, const Eigen::MatrixXd& scores) {
    if (scores.rows() != model.retained) {
        throw Error(ErrorCode::DimensionMismatch,
                    "model retains " + std::to_string(model.retained) + " components, scores are " + shape(scores));
    }
    const Eigen::MatrixXd scaled = model.eigenvectors.leftCols(model.retained) * scores;
    return (scaled.array().colwise() * model.scale.array()).matrix().colwise() + model.mean;
}

}  // namespace grainscope::pca
