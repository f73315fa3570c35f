#include "leafid/feature_store.hpp"

#include "leafid/error.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>

namespace leafid {

namespace {

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

// Splits one CSV record; a quoted field may contain commas and doubled quotes.
std::vector<std::string> split_record(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false, in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"' && cur.empty() && !quoted) {
            in_quotes = quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
            quoted = false;
        } else {
            cur += c;
        }
    }
    if (in_quotes) throw Error(ErrorCode::InvalidArgument, "unterminated quote on line " + std::to_string(line_no));
    fields.push_back(std::move(cur));
    return fields;
}

double parse_double(const std::string& s, std::size_t line_no) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw Error(ErrorCode::InvalidArgument, "bad number '" + s + "' on line " + std::to_string(line_no));
    return v;
}

}  // namespace

FeatureWriter::FeatureWriter(const std::filesystem::path& path, std::size_t dim)
    : out_(path), path_(path), dim_(dim) {
    if (!out_) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out_ << "label,source_path";
    char name[32];
    for (std::size_t i = 0; i < dim; ++i) {
        std::snprintf(name, sizeof name, ",f%03zu", i);
        out_ << name;
    }
    out_ << '\n';
}

void FeatureWriter::append(const std::string& label, const std::string& source, std::span<const double> values) {
    if (values.size() != dim_)
        throw Error(ErrorCode::DimensionMismatch,
                    "row has " + std::to_string(values.size()) + " values, expected " + std::to_string(dim_));
    out_ << quote(label) << ',' << quote(source);
    char buf[32];
    for (double v : values) {
        std::snprintf(buf, sizeof buf, ",%.17g", v);
        out_ << buf;
    }
    out_ << '\n';
    if (!out_) throw Error(ErrorCode::Io, "write failed: " + path_.string());
}

void FeatureWriter::close() {
    out_.close();
    if (out_.fail()) throw Error(ErrorCode::Io, "write failed: " + path_.string());
}

FeatureTable read_features(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::InvalidArgument, "empty feature file " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_record(line, 1);
    if (header.size() < 3 || header[0] != "label" || header[1] != "source_path")
        throw Error(ErrorCode::InvalidArgument, "feature file header must start with label,source_path");
    const std::size_t dim = header.size() - 2;

    std::vector<std::string> names, sources;
    std::vector<double> flat;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split_record(line, line_no);
        if (f.size() != dim + 2)
            throw Error(ErrorCode::InvalidArgument, "line " + std::to_string(line_no) + " has " +
                                                        std::to_string(f.size()) + " fields, expected " +
                                                        std::to_string(dim + 2));
        names.push_back(f[0]);
        sources.push_back(f[1]);
        for (std::size_t i = 0; i < dim; ++i) flat.push_back(parse_double(f[i + 2], line_no));
    }
    if (names.empty()) throw Error(ErrorCode::EmptyDataset, "no feature rows in " + path.string());

    FeatureTable t;
    t.classes = names;
    std::sort(t.classes.begin(), t.classes.end());
    t.classes.erase(std::unique(t.classes.begin(), t.classes.end()), t.classes.end());
    std::map<std::string, int> index;
    for (std::size_t c = 0; c < t.classes.size(); ++c) index[t.classes[c]] = static_cast<int>(c);
    for (const auto& n : names) t.labels.push_back(index[n]);
    t.sources = std::move(sources);
    const auto rows = static_cast<Eigen::Index>(names.size());
    t.values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        flat.data(), rows, static_cast<Eigen::Index>(dim));
    return t;
}

FeatureTable subset(const FeatureTable& t, std::span<const std::size_t> rows) {
    FeatureTable s;
    s.classes = t.classes;
    s.values.resize(static_cast<Eigen::Index>(rows.size()), t.dim());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::size_t r = rows[i];
        if (r >= t.labels.size()) throw Error(ErrorCode::InvalidArgument, "row index out of range");
        s.labels.push_back(t.labels[r]);
        s.sources.push_back(t.sources[r]);
        s.values.row(static_cast<Eigen::Index>(i)) = t.values.row(static_cast<Eigen::Index>(r));
    }
    return s;
}

}  // namespace leafid
