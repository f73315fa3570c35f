#pragma once

#include "leafid/reduce.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace leafid {

struct SvmConfig {
    double C = 1000.0;
    double gamma = 7.0;
    double kkt_tolerance = 1e-3;
    /// Each pass is n working-set updates; 0 means 10 * n passes.
    long max_passes = 0;
    /// Memory allowed for cached kernel rows per binary problem.
    std::size_t cache_bytes = std::size_t{256} << 20;
    /// Scale each sample's C by the inverse frequency of its class.
    bool balanced = true;
    unsigned threads = 1;

    void validate() const;
    friend bool operator==(const SvmConfig&, const SvmConfig&) = default;
};

/// exp(-gamma * |u - v|^2)
double rbf_kernel(std::span<const double> u, std::span<const double> v, double gamma);

/// weight_c = n_total / (n_classes * n_c) for labels in [0, num_classes).
/// Throws EmptyClass if a class has no samples.
std::vector<double> balanced_weights(std::span<const int> labels, int num_classes);

/// A trained two-class machine. `support` indexes rows of the sample matrix
/// it was trained on (or, inside OvoSvm, rows of the support pool).
struct BinarySvm {
    int positive_class = 0;
    int negative_class = 1;
    std::vector<Eigen::Index> support;
    /// alpha_i * y_i for each support vector.
    std::vector<double> coef;
    double bias = 0.0;

    // Training diagnostics, not serialized.
    std::vector<double> alpha;
    double dual_objective = 0.0;
    long iterations = 0;
    bool converged = true;
};

/// sum coef_i * K(sv_i, x) + bias
double decision_value(const BinarySvm& m, const Matrix& samples, std::span<const double> x, double gamma);

/// SMO with second-order working-set selection on the soft-margin dual.
/// `y` holds +1/-1. A run that exhausts max_passes keeps its last iterate and
/// sets `converged = false`.
BinarySvm train_binary(const Matrix& x, std::span<const int> y, const SvmConfig& cfg);

/// Dual objective sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij.
double dual_objective(const Matrix& x, std::span<const int> y, std::span<const double> alpha, double gamma);

struct RankedClass {
    int label = 0;
    int votes = 0;
    double margin_sum = 0.0;
};

/// One-vs-one ensemble; machines ordered (0,1), (0,2), ..., (m-2, m-1).
struct OvoSvm {
    int num_classes = 0;
    double gamma = 7.0;
    Matrix support_pool;
    std::vector<BinarySvm> machines;

    Eigen::Index dim() const { return support_pool.cols(); }
    std::vector<double> decision_values(std::span<const double> x) const;
};

/// Labels must cover 0..m-1 with m >= 2.
OvoSvm train_ovo(const Matrix& x, std::span<const int> labels, const SvmConfig& cfg);

/// Classes ranked by votes, then by summed decision values in their favour,
/// then by label. Returns the first n.
std::vector<RankedClass> predict_topn(const OvoSvm& model, std::span<const double> x, int n);

}  // namespace leafid
