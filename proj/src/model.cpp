#include "leafid/model.hpp"

#include "leafid/error.hpp"
#include "leafid/parallel.hpp"
#include "leafid/rng.hpp"

#include <algorithm>
#include <numeric>

namespace leafid {

Matrix OvoSvmModel::reduce(const Matrix& features) const {
    if (features.cols() != feature_dim())
        throw Error(ErrorCode::DimensionMismatch, "model expects " + std::to_string(feature_dim()) +
                                                      " features, got " + std::to_string(features.cols()));
    return project(standardize(features, standardizer), pca);
}

std::vector<RankedClass> OvoSvmModel::predict_topn(std::span<const double> features, int n) const {
    const Matrix row = Eigen::Map<const Matrix>(features.data(), 1, static_cast<Eigen::Index>(features.size()));
    const Matrix z = reduce(row);
    return leafid::predict_topn(svm, std::span<const double>(z.data(), static_cast<std::size_t>(z.size())), n);
}

int OvoSvmModel::predict(std::span<const double> features) const { return predict_topn(features, 1).front().label; }

OvoSvmModel fit_model(const Matrix& features, std::span<const int> labels, std::vector<std::string> label_names,
                      const ModelConfig& cfg) {
    cfg.svm.validate();
    cfg.scales.validate();
    if (cfg.pca_components < 1) throw Error(ErrorCode::InvalidArgument, "pca_components must be >= 1");
    if (static_cast<Eigen::Index>(labels.size()) != features.rows())
        throw Error(ErrorCode::DimensionMismatch, "label count differs from sample count");
    OvoSvmModel m;
    m.labels = std::move(label_names);
    m.config = cfg;
    m.standardizer = fit_standardizer(features);
    const Matrix xs = standardize(features, m.standardizer);
    m.pca = fit_pca(xs, cfg.pca_components);
    m.svm = train_ovo(project(xs, m.pca), labels, cfg.svm);
    if (m.svm.num_classes != static_cast<int>(m.labels.size()))
        throw Error(ErrorCode::InvalidArgument, "label table size differs from class count");
    return m;
}

std::vector<std::vector<RankedClass>> rank_all(const OvoSvmModel& model, const Matrix& features, int n,
                                               unsigned threads) {
    // Row-major copy so each reduced sample is contiguous.
    using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const RowMatrix z = model.reduce(features);
    std::vector<std::vector<RankedClass>> out(static_cast<std::size_t>(z.rows()));
    parallel_for(out.size(), threads, [&](std::size_t i) {
        const auto r = static_cast<Eigen::Index>(i);
        out[i] = predict_topn(model.svm, std::span<const double>(z.row(r).data(), static_cast<std::size_t>(z.cols())),
                              n);
    });
    return out;
}

namespace {

std::vector<int> stratified_folds(std::span<const int> labels, int num_classes, int folds, std::uint64_t seed) {
    std::vector<int> fold(labels.size(), 0);
    for (int c = 0; c < num_classes; ++c) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == c) idx.push_back(i);
        Rng rng(mix_seed(seed ^ mix_seed(static_cast<std::uint64_t>(c))));
        for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
        for (std::size_t i = 0; i < idx.size(); ++i) fold[idx[i]] = static_cast<int>(i % folds);
    }
    return fold;
}

}  // namespace

std::vector<GridPoint> cv_grid(const Matrix& features, std::span<const int> labels, int num_classes,
                               const ModelConfig& base, std::span<const double> c_values,
                               std::span<const double> gamma_values, int folds, std::uint64_t seed) {
    if (folds < 2) throw Error(ErrorCode::InvalidArgument, "cross-validation needs at least 2 folds");
    if (c_values.empty() || gamma_values.empty()) throw Error(ErrorCode::InvalidArgument, "empty grid");
    const std::vector<int> fold = stratified_folds(labels, num_classes, folds, seed);

    // Reduced train/test matrices per fold do not depend on (C, gamma).
    struct FoldData {
        Matrix train, test;
        std::vector<int> train_labels, test_labels;
    };
    std::vector<FoldData> data;
    for (int f = 0; f < folds; ++f) {
        std::vector<Eigen::Index> tr, te;
        FoldData d;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (fold[i] == f) {
                te.push_back(static_cast<Eigen::Index>(i));
                d.test_labels.push_back(labels[i]);
            } else {
                tr.push_back(static_cast<Eigen::Index>(i));
                d.train_labels.push_back(labels[i]);
            }
        }
        if (te.empty()) continue;
        const Matrix xtr = features(tr, Eigen::all);
        const Standardizer s = fit_standardizer(xtr);
        const Matrix str = standardize(xtr, s);
        const PcaModel p = fit_pca(str, base.pca_components);
        d.train = project(str, p);
        d.test = project(standardize(features(te, Eigen::all), s), p);
        data.push_back(std::move(d));
    }

    std::vector<GridPoint> grid;
    for (double c : c_values)
        for (double g : gamma_values) {
            SvmConfig svm = base.svm;
            svm.C = c;
            svm.gamma = g;
            std::size_t correct = 0, total = 0;
            for (const auto& d : data) {
                const OvoSvm m = train_ovo(d.train, d.train_labels, svm);
                using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
                const RowMatrix zt = d.test;
                for (Eigen::Index r = 0; r < zt.rows(); ++r) {
                    const auto top = predict_topn(
                        m, std::span<const double>(zt.row(r).data(), static_cast<std::size_t>(zt.cols())), 1);
                    correct += top.front().label == d.test_labels[static_cast<std::size_t>(r)];
                    ++total;
                }
            }
            grid.push_back({c, g, total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0});
        }
    return grid;
}

GridPoint best_grid_point(std::span<const GridPoint> grid) {
    if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty grid");
    return *std::min_element(grid.begin(), grid.end(), [](const GridPoint& a, const GridPoint& b) {
        if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
        if (a.C != b.C) return a.C < b.C;
        return a.gamma < b.gamma;
    });
}

}  // namespace leafid
