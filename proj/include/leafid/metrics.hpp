#pragma once

#include "leafid/classifier.hpp"
#include "leafid/model.hpp"

#include <json.hpp>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace leafid {

inline constexpr int kMaxTopN = 10;

struct EvalReport {
    std::vector<std::string> labels;
    /// confusion[truth][predicted]
    std::vector<std::vector<long>> confusion;
    std::vector<double> recall;     // per class
    std::vector<double> precision;  // per class
    std::vector<double> f1;         // per class
    double macro_recall = 0.0;
    double macro_precision = 0.0;
    double macro_f1 = 0.0;
    double accuracy = 0.0;
    /// top_n[k] is the share of items whose truth is among the first k+1 ranks.
    std::vector<double> top_n;
    std::size_t samples = 0;

    nlohmann::json to_json() const;
    static EvalReport from_json(const nlohmann::json& j);
};

/// Metrics from per-sample rankings (best first). Precision of a class that
/// is never predicted is 0, as is F1 when precision and recall are both 0.
EvalReport evaluate_rankings(std::span<const std::vector<RankedClass>> rankings, std::span<const int> truth,
                             std::vector<std::string> labels);

/// Ranks every row of `features` and scores it against `truth`.
EvalReport evaluate(const OvoSvmModel& model, const Matrix& features, std::span<const int> truth,
                    unsigned threads = 1);

void write_report(const EvalReport& r, const std::filesystem::path& path);
EvalReport read_report(const std::filesystem::path& path);

/// `n,accuracy` rows for n = 1..top_n.size().
void write_topn_csv(const EvalReport& r, const std::filesystem::path& path);

}  // namespace leafid
