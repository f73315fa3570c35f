#include "leafid/model_io.hpp"

#include "leafid/error.hpp"

#include <json.hpp>
#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace leafid {

namespace {

constexpr const char* kFormatName = "leafid-model";

class Writer {
public:
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void vec(const Vector& v) {
        for (Eigen::Index i = 0; i < v.size(); ++i) f64(v[i]);
    }
    void mat(const Matrix& m) {  // row-major
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) f64(m(r, c));
    }
    const std::string& bytes() const { return buf_; }

private:
    std::string buf_;
};

class Reader {
public:
    Reader(const char* data, std::size_t size) : data_(data), size_(size) {}
    std::uint64_t u64() {
        if (size_ - pos_ < 8) throw Error(ErrorCode::CorruptModel, "payload ends early");
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    Vector vec(Eigen::Index n) {
        Vector v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = f64();
        return v;
    }
    Matrix mat(Eigen::Index rows, Eigen::Index cols) {
        Matrix m(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = f64();
        return m;
    }
    bool done() const { return pos_ == size_; }

private:
    const char* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

std::uint32_t checksum(const std::string& s) {
    return static_cast<std::uint32_t>(
        crc32(crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(s.data()), static_cast<uInt>(s.size())));
}

nlohmann::json config_json(const ModelConfig& c) {
    return {{"C", c.svm.C},
            {"gamma", c.svm.gamma},
            {"kkt_tolerance", c.svm.kkt_tolerance},
            {"max_passes", c.svm.max_passes},
            {"cache_bytes", c.svm.cache_bytes},
            {"balanced", c.svm.balanced},
            {"threads", c.svm.threads},
            {"pca_components", c.pca_components}};
}

}  // namespace

std::string serialize_model(const OvoSvmModel& m) {
    const Eigen::Index d = m.standardizer.dim();
    const Eigen::Index k = m.pca.output_dim();
    if (m.pca.input_dim() != d || m.svm.dim() != k)
        throw Error(ErrorCode::DimensionMismatch, "inconsistent model dimensions");

    Writer w;
    w.vec(m.standardizer.mean);
    w.vec(m.standardizer.scale);
    w.vec(m.pca.mean);
    w.mat(m.pca.components);
    w.vec(m.pca.explained_variance);
    w.mat(m.svm.support_pool);
    for (const auto& b : m.svm.machines) {
        w.u64(static_cast<std::uint64_t>(b.positive_class));
        w.u64(static_cast<std::uint64_t>(b.negative_class));
        w.u64(b.support.size());
        for (auto i : b.support) w.u64(static_cast<std::uint64_t>(i));
        for (double c : b.coef) w.f64(c);
        w.f64(b.bias);
    }
    const std::string& payload = w.bytes();

    const nlohmann::json header = {
        {"format", kFormatName},
        {"version", kModelFormatVersion},
        {"scales", m.config.scales.scales},
        {"min_radius_px", m.config.scales.min_radius_px},
        {"config", config_json(m.config)},
        {"labels", m.labels},
        {"dims",
         {{"features", d},
          {"components", k},
          {"classes", m.svm.num_classes},
          {"support", m.svm.support_pool.rows()},
          {"machines", m.svm.machines.size()}}},
        {"svm_gamma", m.svm.gamma},
        {"payload_bytes", payload.size()},
        {"crc32", checksum(payload)},
    };
    return header.dump() + '\n' + payload;
}

OvoSvmModel deserialize_model(const std::string& bytes) {
    const auto nl = bytes.find('\n');
    if (nl == std::string::npos) throw Error(ErrorCode::CorruptModel, "missing model header");
    nlohmann::json h;
    try {
        h = nlohmann::json::parse(bytes.substr(0, nl));
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::CorruptModel, "unreadable model header");
    }
    if (!h.is_object() || h.value("format", std::string()) != kFormatName)
        throw Error(ErrorCode::CorruptModel, "not a leafid model");
    if (!h.contains("version") || !h["version"].is_number_integer())
        throw Error(ErrorCode::CorruptModel, "model header has no version");
    if (h["version"].get<int>() != kModelFormatVersion)
        throw Error(ErrorCode::VersionMismatch, "model format version " + h["version"].dump() + ", expected " +
                                                    std::to_string(kModelFormatVersion));

    const std::string payload = bytes.substr(nl + 1);
    OvoSvmModel m;
    try {
        if (h.at("payload_bytes").get<std::size_t>() != payload.size())
            throw Error(ErrorCode::CorruptModel, "payload size mismatch (truncated file?)");
        if (h.at("crc32").get<std::uint32_t>() != checksum(payload))
            throw Error(ErrorCode::CorruptModel, "payload checksum mismatch");

        const auto& c = h.at("config");
        c.at("C").get_to(m.config.svm.C);
        c.at("gamma").get_to(m.config.svm.gamma);
        c.at("kkt_tolerance").get_to(m.config.svm.kkt_tolerance);
        c.at("max_passes").get_to(m.config.svm.max_passes);
        c.at("cache_bytes").get_to(m.config.svm.cache_bytes);
        c.at("balanced").get_to(m.config.svm.balanced);
        c.at("threads").get_to(m.config.svm.threads);
        c.at("pca_components").get_to(m.config.pca_components);
        h.at("scales").get_to(m.config.scales.scales);
        h.at("min_radius_px").get_to(m.config.scales.min_radius_px);
        h.at("labels").get_to(m.labels);

        const auto& dims = h.at("dims");
        const auto d = dims.at("features").get<Eigen::Index>();
        const auto k = dims.at("components").get<Eigen::Index>();
        const auto classes = dims.at("classes").get<int>();
        const auto sv = dims.at("support").get<Eigen::Index>();
        const auto machines = dims.at("machines").get<std::size_t>();
        const std::size_t words = payload.size() / 8;
        if (d < 1 || k < 1 || sv < 0 || classes < 2 ||
            machines != static_cast<std::size_t>(classes) * static_cast<std::size_t>(classes - 1) / 2 ||
            static_cast<std::size_t>(d) > words || static_cast<std::size_t>(k) > words ||
            static_cast<std::size_t>(sv) > words || static_cast<std::size_t>(classes) != m.labels.size())
            throw Error(ErrorCode::CorruptModel, "inconsistent model dimensions");

        Reader r(payload.data(), payload.size());
        m.standardizer.mean = r.vec(d);
        m.standardizer.scale = r.vec(d);
        m.pca.mean = r.vec(d);
        m.pca.components = r.mat(k, d);
        m.pca.explained_variance = r.vec(k);
        m.svm.num_classes = classes;
        h.at("svm_gamma").get_to(m.svm.gamma);
        m.svm.support_pool = r.mat(sv, k);
        m.svm.machines.resize(machines);
        for (auto& b : m.svm.machines) {
            b.positive_class = static_cast<int>(r.u64());
            b.negative_class = static_cast<int>(r.u64());
            const std::uint64_t n = r.u64();
            if (n > static_cast<std::uint64_t>(sv)) throw Error(ErrorCode::CorruptModel, "support count too large");
            b.support.resize(n);
            for (auto& i : b.support) {
                const std::uint64_t v = r.u64();
                if (v >= static_cast<std::uint64_t>(sv)) throw Error(ErrorCode::CorruptModel, "support index out of range");
                i = static_cast<Eigen::Index>(v);
            }
            b.coef.resize(n);
            for (auto& x : b.coef) x = r.f64();
            b.bias = r.f64();
            if (b.positive_class < 0 || b.negative_class < 0 || b.positive_class >= classes ||
                b.negative_class >= classes)
                throw Error(ErrorCode::CorruptModel, "machine class out of range");
        }
        if (!r.done()) throw Error(ErrorCode::CorruptModel, "trailing payload bytes");
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::CorruptModel, std::string("bad model header: ") + e.what());
    }
    return m;
}

void save_model(const OvoSvmModel& m, const std::filesystem::path& path) {
    const std::string bytes = serialize_model(m);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

OvoSvmModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_model(bytes);
}

}  // namespace leafid
