#include "leafid/reduce.hpp"

#include "leafid/error.hpp"

#include <algorithm>
#include <cmath>

namespace leafid {

namespace {

// Above this many features with fewer samples than features, the n x n Gram
// matrix is decomposed instead of the d x d covariance.
constexpr Eigen::Index kGramThreshold = 2048;

void fix_sign(Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row) {
    const double peak = row.cwiseAbs().maxCoeff();
    for (Eigen::Index j = 0; j < row.size(); ++j) {
        if (std::abs(row(j)) > 1e-10 * peak) {
            if (row(j) < 0) row = -row;
            return;
        }
    }
}

// Modified Gram-Schmidt over the rows; rows that collapse are replaced by the
// first standard basis vector that is still independent.
void orthonormalize_rows(Matrix& c) {
    const Eigen::Index d = c.cols();
    Eigen::Index next_basis = 0;
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
        for (int attempt = 0; attempt <= d; ++attempt) {
            for (Eigen::Index j = 0; j < i; ++j) c.row(i) -= c.row(i).dot(c.row(j)) * c.row(j);
            const double norm = c.row(i).norm();
            if (norm > 1e-8) {
                c.row(i) /= norm;
                break;
            }
            c.row(i).setZero();
            c(i, next_basis++ % d) = 1.0;
        }
    }
}

}  // namespace

Standardizer fit_standardizer(const Matrix& x) {
    if (x.rows() < 2) throw Error(ErrorCode::TooFewSamples, "standardizer needs at least 2 samples");
    Standardizer s;
    s.mean = x.colwise().mean().transpose();
    const Matrix centred = x.rowwise() - s.mean.transpose();
    s.scale = (centred.colwise().squaredNorm() / static_cast<double>(x.rows())).cwiseSqrt().transpose();
    s.scale = s.scale.cwiseMax(kStdFloor);
    return s;
}

Matrix standardize(const Matrix& x, const Standardizer& s) {
    if (x.cols() != s.dim())
        throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(s.dim()) + " features, got " +
                                                      std::to_string(x.cols()));
    return (x.rowwise() - s.mean.transpose()).array().rowwise() / s.scale.transpose().array();
}

PcaModel fit_pca(const Matrix& x, Eigen::Index k) {
    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols();
    if (n < 2) throw Error(ErrorCode::TooFewSamples, "PCA needs at least 2 samples");
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "PCA needs at least one component");
    k = std::min({k, n - 1, d});

    PcaModel pca;
    pca.mean = x.colwise().mean().transpose();
    const Matrix centred = x.rowwise() - pca.mean.transpose();
    const double denom = static_cast<double>(n - 1);
    pca.components.resize(k, d);
    pca.explained_variance.resize(k);

    if (n < d && d > kGramThreshold) {
        const Matrix gram = centred * centred.transpose() / denom;
        Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
        for (Eigen::Index i = 0; i < k; ++i) {
            const Eigen::Index src = n - 1 - i;
            const double lambda = std::max(eig.eigenvalues()(src), 0.0);
            pca.explained_variance(i) = lambda;
            pca.components.row(i) = (centred.transpose() * eig.eigenvectors().col(src)).transpose();
        }
        orthonormalize_rows(pca.components);
    } else {
        const Matrix cov = centred.transpose() * centred / denom;
        Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
        for (Eigen::Index i = 0; i < k; ++i) {
            const Eigen::Index src = d - 1 - i;
            pca.explained_variance(i) = std::max(eig.eigenvalues()(src), 0.0);
            pca.components.row(i) = eig.eigenvectors().col(src).transpose();
        }
    }
    for (Eigen::Index i = 0; i < k; ++i) fix_sign(pca.components.row(i));
    return pca;
}

Matrix project(const Matrix& x, const PcaModel& pca) {
    if (x.cols() != pca.input_dim())
        throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(pca.input_dim()) +
                                                      " inputs, got " + std::to_string(x.cols()));
    return (x.rowwise() - pca.mean.transpose()) * pca.components.transpose();
}

Matrix reconstruct(const Matrix& z, const PcaModel& pca) {
    if (z.cols() != pca.output_dim()) throw Error(ErrorCode::DimensionMismatch, "projection width mismatch");
    return (z * pca.components).rowwise() + pca.mean.transpose();
}

}  // namespace leafid
