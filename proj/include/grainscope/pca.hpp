/**
 * @file pca.hpp
 * @brief Principal component analysis built step by step: empirical mean,
 *        centering, 1/N covariance, cyclic Jacobi eigendecomposition,
 *        descending sort, component selection and projection.
 *
 * Data matrices hold one observation per column (M features x N observations).
 */
#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace grainscope::pca {

/// M x N matrix, observations in columns. All values finite, M, N >= 1.
class DataMatrix {
public:
    explicit DataMatrix(Eigen::MatrixXd values);

    const Eigen::MatrixXd& values() const noexcept { return values_; }
    Eigen::Index features() const noexcept { return values_.rows(); }
    Eigen::Index observations() const noexcept { return values_.cols(); }

private:
    Eigen::MatrixXd values_;
};

/// Mean-subtracted data, B = X - u h.
class CenteredMatrix {
public:
    explicit CenteredMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {}

    const Eigen::MatrixXd& values() const noexcept { return values_; }

private:
    Eigen::MatrixXd values_;
};

struct EigenDecomposition {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;  ///< column j pairs with values[j]
    int sweeps = 0;
};

/// Fitted model. Eigenvalues are sorted descending; `retained` leading
/// eigenvector columns form the projection.
struct PcaModel {
    Eigen::VectorXd mean;
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;
    Eigen::Index retained = 0;
    bool standardized = false;
    /// Per-feature divisor applied after centering; all ones unless standardized.
    Eigen::VectorXd scale;
    std::vector<std::string> feature_names;
};

/// How many components fit() keeps.
struct ComponentChoice {
    /// Explicit k; when empty the smallest k reaching `variance_target` is used.
    std::optional<Eigen::Index> k;
    double variance_target = 0.95;
};

struct FitOptions {
    ComponentChoice components;
    bool standardize = false;
    std::vector<std::string> feature_names;
};

Eigen::VectorXd empirical_mean(const DataMatrix& x);

/// B[m, n] = X[m, n] - u[m]. Throws DimensionMismatch if u.size() != M.
CenteredMatrix mean_subtract(const DataMatrix& x, const Eigen::VectorXd& u);

/// C = (1/N) B B^T.
Eigen::MatrixXd covariance(const CenteredMatrix& b);

/// Cyclic Jacobi rotations until every off-diagonal entry is below
/// 1e-12 * ||C||_F; at most 100 sweeps (NoConvergence past that).
/// Each eigenvector's largest-magnitude entry is positive (lowest index on ties).
/// Throws NotSymmetric when C is not symmetric to 1e-9 relative.
EigenDecomposition eig_symmetric(const Eigen::MatrixXd& c);

/// Stable sort into descending eigenvalue order, permuting columns alongside.
EigenDecomposition sort_components(EigenDecomposition eig);

/// First k columns of the sorted eigenvector matrix. Throws BadK unless 1 <= k <= M.
Eigen::MatrixXd select_components(const EigenDecomposition& sorted, Eigen::Index k);

/// FinalData = F^T B (k x N): row i holds the i-th component scores.
Eigen::MatrixXd project(const Eigen::MatrixXd& feature_vector, const CenteredMatrix& b);

/// Smallest k whose cumulative variance ratio reaches `target`; 1 for an all-zero spectrum.
Eigen::Index components_for_variance(const Eigen::VectorXd& sorted_eigenvalues, double target);

/// Full pipeline. Throws TooFewObservations when N < 2.
PcaModel fit(const DataMatrix& x, const FitOptions& options = {});

/// Centers (and scales) with the model's stored statistics, then projects: k x N scores.
Eigen::MatrixXd transform(const PcaModel& model, const Eigen::MatrixXd& x_new);

/// Maps k x N scores back to feature space: V_k * scores * scale + u h.
Eigen::MatrixXd inverse_transform(const PcaModel& model, const Eigen::MatrixXd& scores);

}  // namespace grainscope::pca
