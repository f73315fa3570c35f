#include "leafid/image.hpp"

#include "leafid/error.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

namespace leafid {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw Error(ErrorCode::Io, "cannot open " + path.string());
    return f;
}

void check_dims(int width, int height, int channels) {
    if (width < Image::kMinSide || height < Image::kMinSide)
        throw Error(ErrorCode::InvalidArgument,
                    "image must be at least 16x16, got " + std::to_string(width) + "x" +
                        std::to_string(height));
    if (channels != 1 && channels != 3)
        throw Error(ErrorCode::InvalidArgument, "channel count must be 1 or 3");
}

[[noreturn]] void png_error_fn(png_structp png, png_const_charp msg) {
    auto* text = static_cast<std::string*>(png_get_error_ptr(png));
    if (text) *text = msg;
    png_longjmp(png, 1);
}

void png_warning_fn(png_structp, png_const_charp) {}

Image read_png(const std::filesystem::path& path) {
    auto file = open_file(path, "rb");
    std::string err;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_error_fn, png_warning_fn);
    if (!png) throw Error(ErrorCode::Io, "png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    std::vector<std::uint8_t> pixels;
    std::vector<png_bytep> rows;
    png_uint_32 width = 0, height = 0;
    int channels = 0;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error(ErrorCode::Io, "corrupt PNG " + path.string() + ": " + err);
    }
    png_init_io(png, file.get());
    png_read_info(png, info);
    width = png_get_image_width(png, info);
    height = png_get_image_height(png, info);
    const int color_type = png_get_color_type(png, info);
    const int bit_depth = png_get_bit_depth(png, info);

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (bit_depth == 16) png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);
    channels = png_get_channels(png, info);

    pixels.resize(static_cast<std::size_t>(width) * height * channels);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y)
        rows[y] = pixels.data() + static_cast<std::size_t>(y) * width * channels;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    return Image(static_cast<int>(width), static_cast<int>(height), channels, std::move(pixels));
}

// Netpbm: P1..P6. Comments and arbitrary whitespace are permitted in the header.
class PnmReader {
public:
    explicit PnmReader(std::string bytes) : bytes_(std::move(bytes)) {}

    int next_int() {
        skip_space();
        if (pos_ >= bytes_.size() || !std::isdigit(static_cast<unsigned char>(bytes_[pos_])))
            throw Error(ErrorCode::Io, "malformed netpbm header");
        long value = 0;
        while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
            value = value * 10 + (bytes_[pos_++] - '0');
            if (value > (1L << 30)) throw Error(ErrorCode::Io, "netpbm value out of range");
        }
        return static_cast<int>(value);
    }

    int next_bit() {
        skip_space();
        if (pos_ >= bytes_.size()) throw Error(ErrorCode::Io, "truncated netpbm data");
        const char c = bytes_[pos_++];
        if (c != '0' && c != '1') throw Error(ErrorCode::Io, "malformed PBM data");
        return c - '0';
    }

    // Exactly one whitespace byte separates the header from binary data.
    void skip_single_space() { ++pos_; }

    std::string_view remaining() const { return std::string_view(bytes_).substr(std::min(pos_, bytes_.size())); }

private:
    void skip_space() {
        while (pos_ < bytes_.size()) {
            const char c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    std::string bytes_;
    std::size_t pos_ = 2;
};

Image read_pnm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string bytes = ss.str();
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] < '1' || bytes[1] > '6')
        throw Error(ErrorCode::Io, "not a netpbm file: " + path.string());
    const int kind = bytes[1] - '0';
    PnmReader r(std::move(bytes));
    const int width = r.next_int();
    const int height = r.next_int();
    check_dims(width, height, 1);
    const bool bitmap = kind == 1 || kind == 4;
    const int maxval = bitmap ? 1 : r.next_int();
    if (maxval < 1 || maxval > 65535) throw Error(ErrorCode::Io, "bad netpbm maxval");
    const int channels = (kind == 3 || kind == 6) ? 3 : 1;
    const std::size_t count = static_cast<std::size_t>(width) * height * channels;
    std::vector<std::uint8_t> pixels(count);

    auto scale = [maxval](int v) {
        return static_cast<std::uint8_t>(std::lround(255.0 * std::min(v, maxval) / maxval));
    };

    if (kind == 1) {
        for (auto& p : pixels) p = r.next_bit() ? 0 : 255;  // PBM: 1 is black
    } else if (kind == 2 || kind == 3) {
        for (auto& p : pixels) p = scale(r.next_int());
    } else if (kind == 4) {
        r.skip_single_space();
        const auto data = r.remaining();
        const std::size_t stride = (static_cast<std::size_t>(width) + 7) / 8;
        if (data.size() < stride * height) throw Error(ErrorCode::Io, "truncated PBM data");
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                const auto byte = static_cast<std::uint8_t>(data[y * stride + x / 8]);
                pixels[static_cast<std::size_t>(y) * width + x] = ((byte >> (7 - x % 8)) & 1) ? 0 : 255;
            }
    } else {
        r.skip_single_space();
        const auto data = r.remaining();
        const std::size_t bytes_per = maxval > 255 ? 2 : 1;
        if (data.size() < count * bytes_per) throw Error(ErrorCode::Io, "truncated netpbm data");
        for (std::size_t i = 0; i < count; ++i) {
            int v = static_cast<std::uint8_t>(data[i * bytes_per]);
            if (bytes_per == 2) v = (v << 8) | static_cast<std::uint8_t>(data[i * 2 + 1]);
            pixels[i] = scale(v);
        }
    }
    return Image(width, height, channels, std::move(pixels));
}

void write_png_rows(const std::filesystem::path& path, int width, int height, int bit_depth,
                    int color_type, const std::vector<std::vector<std::uint8_t>>& rows) {
    auto file = open_file(path, "wb");
    std::string err;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_error_fn, png_warning_fn);
    if (!png) throw Error(ErrorCode::Io, "png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error(ErrorCode::Io, "failed writing " + path.string() + ": " + err);
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth,
                 color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (const auto& row : rows) png_write_row(png, row.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace

Image::Image(int width, int height, int channels, std::uint8_t fill)
    : width_(width), height_(height), channels_(channels) {
    check_dims(width, height, channels);
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

Image::Image(int width, int height, int channels, std::vector<std::uint8_t> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
    check_dims(width, height, channels);
    if (data_.size() != static_cast<std::size_t>(width) * height * channels)
        throw Error(ErrorCode::InvalidArgument, "pixel buffer size does not match dimensions");
}

BinaryMask::BinaryMask(int width, int height, std::uint8_t fill)
    : width_(width), height_(height), bits_(static_cast<std::size_t>(width) * height, fill ? 1 : 0) {
    if (width <= 0 || height <= 0) throw Error(ErrorCode::InvalidArgument, "mask dimensions must be positive");
}

std::size_t BinaryMask::count() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

bool BinaryMask::subset_of(const BinaryMask& other) const {
    if (width_ != other.width_ || height_ != other.height_) return false;
    for (std::size_t i = 0; i < bits_.size(); ++i)
        if (bits_[i] && !other.bits_[i]) return false;
    return true;
}

namespace {

template <typename Op>
BinaryMask combine(const BinaryMask& a, const BinaryMask& b, Op op) {
    if (a.width() != b.width() || a.height() != b.height())
        throw Error(ErrorCode::DimensionMismatch, "mask dimensions differ");
    BinaryMask out(a.width(), a.height());
    auto ab = a.bits();
    auto bb = b.bits();
    auto ob = out.bits();
    for (std::size_t i = 0; i < ob.size(); ++i) ob[i] = op(ab[i], bb[i]) ? 1 : 0;
    return out;
}

}  // namespace

BinaryMask operator|(const BinaryMask& a, const BinaryMask& b) {
    return combine(a, b, [](std::uint8_t x, std::uint8_t y) { return x || y; });
}
BinaryMask operator&(const BinaryMask& a, const BinaryMask& b) {
    return combine(a, b, [](std::uint8_t x, std::uint8_t y) { return x && y; });
}
BinaryMask operator-(const BinaryMask& a, const BinaryMask& b) {
    return combine(a, b, [](std::uint8_t x, std::uint8_t y) { return x && !y; });
}

bool is_supported_image(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".pgm" || ext == ".ppm" || ext == ".pbm" || ext == ".pnm";
}

Image read_image(const std::filesystem::path& path) {
    std::array<unsigned char, 8> sig{};
    {
        auto f = open_file(path, "rb");
        if (std::fread(sig.data(), 1, sig.size(), f.get()) < 2)
            throw Error(ErrorCode::Io, "file too short: " + path.string());
    }
    if (png_sig_cmp(sig.data(), 0, sig.size()) == 0) return read_png(path);
    if (sig[0] == 'P' && sig[1] >= '1' && sig[1] <= '6') return read_pnm(path);
    throw Error(ErrorCode::Io, "unsupported image format: " + path.string());
}

void write_png(const Image& img, const std::filesystem::path& path) {
    std::vector<std::vector<std::uint8_t>> rows(img.height());
    const std::size_t stride = static_cast<std::size_t>(img.width()) * img.channels();
    for (int y = 0; y < img.height(); ++y)
        rows[y].assign(img.data().begin() + y * stride, img.data().begin() + (y + 1) * stride);
    write_png_rows(path, img.width(), img.height(), 8,
                   img.channels() == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, rows);
}

void write_mask_png(const BinaryMask& mask, const std::filesystem::path& path) {
    std::vector<std::vector<std::uint8_t>> rows(mask.height(),
                                                std::vector<std::uint8_t>((mask.width() + 7) / 8, 0));
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.at(x, y)) rows[y][x / 8] |= static_cast<std::uint8_t>(0x80 >> (x % 8));
    write_png_rows(path, mask.width(), mask.height(), 1, PNG_COLOR_TYPE_GRAY, rows);
}

void write_pnm(const Image& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string());
    out << (img.channels() == 3 ? "P6" : "P5") << '\n' << img.width() << ' ' << img.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data().data()), static_cast<std::streamsize>(img.data().size()));
    if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

Image mask_to_image(const BinaryMask& mask, std::uint8_t fg, std::uint8_t bg) {
    Image img(mask.width(), mask.height(), 1, bg);
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.at(x, y)) img.at(x, y) = fg;
    return img;
}

namespace {

// Per-output-pixel source coverage along one axis: list of (source index, weight).
std::vector<std::vector<std::pair<int, double>>> area_weights(int src, int dst) {
    std::vector<std::vector<std::pair<int, double>>> w(dst);
    const double ratio = static_cast<double>(src) / dst;
    for (int i = 0; i < dst; ++i) {
        const double lo = i * ratio;
        const double hi = (i + 1) * ratio;
        for (int s = static_cast<int>(std::floor(lo)); s < std::min(src, static_cast<int>(std::ceil(hi))); ++s) {
            const double cover = std::min(hi, s + 1.0) - std::max(lo, static_cast<double>(s));
            if (cover > 0) w[i].emplace_back(s, cover / ratio);
        }
    }
    return w;
}

std::vector<std::vector<std::pair<int, double>>> bilinear_weights(int src, int dst) {
    std::vector<std::vector<std::pair<int, double>>> w(dst);
    const double ratio = static_cast<double>(src) / dst;
    for (int i = 0; i < dst; ++i) {
        const double pos = std::clamp((i + 0.5) * ratio - 0.5, 0.0, static_cast<double>(src - 1));
        const int s0 = static_cast<int>(std::floor(pos));
        const int s1 = std::min(s0 + 1, src - 1);
        const double t = pos - s0;
        w[i].emplace_back(s0, 1.0 - t);
        if (s1 != s0) w[i].emplace_back(s1, t);
    }
    return w;
}

}  // namespace

Image resize(const Image& img, int width, int height) {
    if (width == img.width() && height == img.height()) return img;
    const auto wx = width < img.width() ? area_weights(img.width(), width) : bilinear_weights(img.width(), width);
    const auto wy = height < img.height() ? area_weights(img.height(), height)
                                          : bilinear_weights(img.height(), height);
    const int ch = img.channels();
    std::vector<double> tmp(static_cast<std::size_t>(width) * img.height() * ch, 0.0);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < width; ++x)
            for (const auto& [sx, w] : wx[x])
                for (int c = 0; c < ch; ++c)
                    tmp[(static_cast<std::size_t>(y) * width + x) * ch + c] += w * img.at(sx, y, c);
    Image out(width, height, ch);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            for (int c = 0; c < ch; ++c) {
                double v = 0;
                for (const auto& [sy, w] : wy[y]) v += w * tmp[(static_cast<std::size_t>(sy) * width + x) * ch + c];
                out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
            }
    return out;
}

Image rotate90(const Image& img, int turns) {
    turns = ((turns % 4) + 4) % 4;
    Image cur = img;
    for (int t = 0; t < turns; ++t) {
        Image next(cur.height(), cur.width(), cur.channels());
        for (int y = 0; y < cur.height(); ++y)
            for (int x = 0; x < cur.width(); ++x)
                for (int c = 0; c < cur.channels(); ++c) next.at(y, cur.width() - 1 - x, c) = cur.at(x, y, c);
        cur = std::move(next);
    }
    return cur;
}

BinaryMask rotate90(const BinaryMask& mask, int turns) {
    turns = ((turns % 4) + 4) % 4;
    BinaryMask cur = mask;
    for (int t = 0; t < turns; ++t) {
        BinaryMask next(cur.height(), cur.width());
        for (int y = 0; y < cur.height(); ++y)
            for (int x = 0; x < cur.width(); ++x) next.at(y, cur.width() - 1 - x) = cur.at(x, y);
        cur = std::move(next);
    }
    return cur;
}

}  // namespace leafid
