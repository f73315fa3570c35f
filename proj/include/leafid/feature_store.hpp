#pragma once

#include "leafid/reduce.hpp"

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace leafid {

/// Feature rows with their class names and source images.
struct FeatureTable {
    /// Class names, sorted; `labels` index into this.
    std::vector<std::string> classes;
    std::vector<int> labels;
    std::vector<std::string> sources;
    Matrix values;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index dim() const { return values.cols(); }
};

/// Streams rows to a CSV file with header `label,source_path,f000,...`.
/// Values are written with 17 significant digits so they read back exactly.
class FeatureWriter {
public:
    FeatureWriter(const std::filesystem::path& path, std::size_t dim);
    void append(const std::string& label, const std::string& source, std::span<const double> values);
    void close();

private:
    std::ofstream out_;
    std::filesystem::path path_;
    std::size_t dim_;
};

/// Throws InvalidArgument on malformed rows or inconsistent widths.
FeatureTable read_features(const std::filesystem::path& path);

/// Rows of `t` selected by index, keeping the class table.
FeatureTable subset(const FeatureTable& t, std::span<const std::size_t> rows);

}  // namespace leafid
