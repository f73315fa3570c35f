#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace leafid {

/// 8-bit image with 1 (grey) or 3 (RGB) interleaved channels, row-major.
class Image {
public:
    static constexpr int kMinSide = 16;

    Image() = default;
    Image(int width, int height, int channels, std::uint8_t fill = 0);
    Image(int width, int height, int channels, std::vector<std::uint8_t> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }
    bool empty() const noexcept { return data_.empty(); }

    std::uint8_t& at(int x, int y, int c = 0) noexcept {
        return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
    }
    std::uint8_t at(int x, int y, int c = 0) const noexcept {
        return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
    }

    std::span<const std::uint8_t> data() const noexcept { return data_; }
    std::span<std::uint8_t> data() noexcept { return data_; }

    friend bool operator==(const Image&, const Image&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Binary image, one byte per pixel holding 0 or 1. Foreground is 1.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height, std::uint8_t fill = 0);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    bool contains(int x, int y) const noexcept {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }
    std::uint8_t& at(int x, int y) noexcept { return bits_[static_cast<std::size_t>(y) * width_ + x]; }
    std::uint8_t at(int x, int y) const noexcept {
        return bits_[static_cast<std::size_t>(y) * width_ + x];
    }
    /// Out-of-bounds reads return background.
    std::uint8_t get(int x, int y) const noexcept { return contains(x, y) ? at(x, y) : 0; }

    std::size_t count() const noexcept;
    std::span<const std::uint8_t> bits() const noexcept { return bits_; }
    std::span<std::uint8_t> bits() noexcept { return bits_; }

    /// True when every foreground pixel of *this is foreground in `other`.
    bool subset_of(const BinaryMask& other) const;

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

BinaryMask operator|(const BinaryMask& a, const BinaryMask& b);
BinaryMask operator&(const BinaryMask& a, const BinaryMask& b);
/// Pixels set in `a` and clear in `b`.
BinaryMask operator-(const BinaryMask& a, const BinaryMask& b);

/// Reads PNG (any bit depth / colour type) or binary/ASCII PGM, PPM and PBM.
/// Alpha is dropped, palettes expanded, 16-bit samples reduced to 8 bits.
Image read_image(const std::filesystem::path& path);

void write_png(const Image& img, const std::filesystem::path& path);
/// Writes a 1-bit greyscale PNG, foreground white.
void write_mask_png(const BinaryMask& mask, const std::filesystem::path& path);
void write_pnm(const Image& img, const std::filesystem::path& path);

/// Renders a mask as an 8-bit grey image: foreground -> `fg`, background -> `bg`.
Image mask_to_image(const BinaryMask& mask, std::uint8_t fg = 0, std::uint8_t bg = 255);

/// Area-averaging resample when shrinking, bilinear when enlarging.
Image resize(const Image& img, int width, int height);

/// Quarter-turn counter-clockwise (as displayed), `turns` in 0..3.
Image rotate90(const Image& img, int turns = 1);
BinaryMask rotate90(const BinaryMask& mask, int turns = 1);

bool is_supported_image(const std::filesystem::path& path);

}  // namespace leafid
