#pragma once

#include <Eigen/Dense>

namespace leafid {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kStdFloor = 1e-12;

/// Per-feature affine scaling to zero mean and unit (population) variance.
struct Standardizer {
    Vector mean;
    /// Standard deviations after flooring at kStdFloor.
    Vector scale;

    Eigen::Index dim() const { return mean.size(); }
};

Standardizer fit_standardizer(const Matrix& x);
Matrix standardize(const Matrix& x, const Standardizer& s);

struct PcaModel {
    /// k x d, orthonormal rows, ordered by decreasing explained variance.
    Matrix components;
    Vector explained_variance;
    Vector mean;

    Eigen::Index input_dim() const { return mean.size(); }
    Eigen::Index output_dim() const { return components.rows(); }
};

/// Top principal components of the sample covariance. k is lowered to
/// min(k, n - 1, d); the value actually used is `output_dim()`. Each component
/// is signed so that its first non-negligible coefficient is positive.
PcaModel fit_pca(const Matrix& x, Eigen::Index k = 128);

/// (x - mean) * components^T.
Matrix project(const Matrix& x, const PcaModel& pca);
Matrix reconstruct(const Matrix& z, const PcaModel& pca);

}  // namespace leafid
