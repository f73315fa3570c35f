#include "leafid/metrics.hpp"

#include "leafid/error.hpp"

#include <algorithm>
#include <fstream>

namespace leafid {

EvalReport evaluate_rankings(std::span<const std::vector<RankedClass>> rankings, std::span<const int> truth,
                             std::vector<std::string> labels) {
    if (rankings.size() != truth.size())
        throw Error(ErrorCode::DimensionMismatch, "ranking count differs from truth count");
    const auto m = labels.size();
    if (m == 0) throw Error(ErrorCode::InvalidArgument, "no classes");
    EvalReport r;
    r.labels = std::move(labels);
    r.samples = truth.size();
    r.confusion.assign(m, std::vector<long>(m, 0));
    const int max_n = static_cast<int>(std::min<std::size_t>(kMaxTopN, m));
    std::vector<long> hits(static_cast<std::size_t>(max_n), 0);

    for (std::size_t i = 0; i < truth.size(); ++i) {
        const auto& rank = rankings[i];
        const int t = truth[i];
        if (rank.empty() || t < 0 || static_cast<std::size_t>(t) >= m)
            throw Error(ErrorCode::InvalidArgument, "invalid ranking or label at item " + std::to_string(i));
        const int p = rank.front().label;
        if (p < 0 || static_cast<std::size_t>(p) >= m)
            throw Error(ErrorCode::InvalidArgument, "predicted label out of range");
        ++r.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
        for (int k = 0; k < static_cast<int>(rank.size()) && k < max_n; ++k)
            if (rank[static_cast<std::size_t>(k)].label == t) {
                for (int j = k; j < max_n; ++j) ++hits[static_cast<std::size_t>(j)];
                break;
            }
    }

    r.recall.assign(m, 0.0);
    r.precision.assign(m, 0.0);
    r.f1.assign(m, 0.0);
    long correct = 0;
    for (std::size_t c = 0; c < m; ++c) {
        long row = 0, col = 0;
        for (std::size_t j = 0; j < m; ++j) {
            row += r.confusion[c][j];
            col += r.confusion[j][c];
        }
        const long tp = r.confusion[c][c];
        correct += tp;
        r.recall[c] = row ? static_cast<double>(tp) / static_cast<double>(row) : 0.0;
        r.precision[c] = col ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
        const double s = r.recall[c] + r.precision[c];
        r.f1[c] = s > 0.0 ? 2.0 * r.recall[c] * r.precision[c] / s : 0.0;
        r.macro_recall += r.recall[c];
        r.macro_precision += r.precision[c];
        r.macro_f1 += r.f1[c];
    }
    const double md = static_cast<double>(m);
    r.macro_recall /= md;
    r.macro_precision /= md;
    r.macro_f1 /= md;
    const double n = static_cast<double>(std::max<std::size_t>(truth.size(), 1));
    r.accuracy = static_cast<double>(correct) / n;
    for (long h : hits) r.top_n.push_back(static_cast<double>(h) / n);
    return r;
}

EvalReport evaluate(const OvoSvmModel& model, const Matrix& features, std::span<const int> truth, unsigned threads) {
    const int n = std::min<int>(kMaxTopN, model.svm.num_classes);
    const auto rankings = rank_all(model, features, n, threads);
    return evaluate_rankings(rankings, truth, model.labels);
}

nlohmann::json EvalReport::to_json() const {
    return {{"labels", labels},
            {"samples", samples},
            {"accuracy", accuracy},
            {"macro_recall", macro_recall},
            {"macro_precision", macro_precision},
            {"macro_f1", macro_f1},
            {"recall", recall},
            {"precision", precision},
            {"f1", f1},
            {"top_n", top_n},
            {"confusion", confusion}};
}

EvalReport EvalReport::from_json(const nlohmann::json& j) {
    try {
        EvalReport r;
        j.at("labels").get_to(r.labels);
        j.at("samples").get_to(r.samples);
        j.at("accuracy").get_to(r.accuracy);
        j.at("macro_recall").get_to(r.macro_recall);
        j.at("macro_precision").get_to(r.macro_precision);
        j.at("macro_f1").get_to(r.macro_f1);
        j.at("recall").get_to(r.recall);
        j.at("precision").get_to(r.precision);
        j.at("f1").get_to(r.f1);
        j.at("top_n").get_to(r.top_n);
        j.at("confusion").get_to(r.confusion);
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("malformed report: ") + e.what());
    }
}

void write_report(const EvalReport& r, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << r.to_json().dump(2) << '\n';
    if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

EvalReport read_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("malformed report: ") + e.what());
    }
    return EvalReport::from_json(j);
}

void write_topn_csv(const EvalReport& r, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out.precision(17);
    out << "n,accuracy\n";
    for (std::size_t k = 0; k < r.top_n.size(); ++k) out << k + 1 << ',' << r.top_n[k] << '\n';
    if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

}  // namespace leafid
