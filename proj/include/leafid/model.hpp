#pragma once

#include "leafid/classifier.hpp"
#include "leafid/laii.hpp"
#include "leafid/reduce.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace leafid {

struct ModelConfig {
    SvmConfig svm;
    /// Requested PCA dimension; lowered by fit_pca when the data is smaller.
    Eigen::Index pca_components = 128;
    ScaleSet scales;
    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Standardizer, PCA and one-vs-one SVM, applied to raw feature rows.
struct OvoSvmModel {
    std::vector<std::string> labels;
    ModelConfig config;
    Standardizer standardizer;
    PcaModel pca;
    OvoSvm svm;

    Eigen::Index feature_dim() const { return standardizer.dim(); }
    /// Raw features (one row per sample) to SVM input coordinates.
    Matrix reduce(const Matrix& features) const;
    std::vector<RankedClass> predict_topn(std::span<const double> features, int n) const;
    int predict(std::span<const double> features) const;
};

/// Labels must cover 0..labels.size()-1.
OvoSvmModel fit_model(const Matrix& features, std::span<const int> labels, std::vector<std::string> label_names,
                      const ModelConfig& cfg);

/// One row per sample: classes ranked best first, `n` entries each.
std::vector<std::vector<RankedClass>> rank_all(const OvoSvmModel& model, const Matrix& features, int n,
                                               unsigned threads = 1);

// Default search grid; gamma spans the default down to values suited to PCA coordinates.
inline constexpr std::array<double, 4> kGridC{1, 10, 100, 1000};
inline constexpr std::array<double, 6> kGridGamma{7, 0.7, 0.07, 0.007, 7e-4, 7e-5};

struct GridPoint {
    double C = 0.0;
    double gamma = 0.0;
    double accuracy = 0.0;
    friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

/// k-fold cross-validated accuracy for every (C, gamma) pair. Folds are
/// stratified and seeded; standardization and PCA are refitted per fold.
std::vector<GridPoint> cv_grid(const Matrix& features, std::span<const int> labels, int num_classes,
                               const ModelConfig& base, std::span<const double> c_values,
                               std::span<const double> gamma_values, int folds, std::uint64_t seed);

/// The best grid point: highest accuracy, then smaller C, then smaller gamma.
GridPoint best_grid_point(std::span<const GridPoint> grid);

}  // namespace leafid
