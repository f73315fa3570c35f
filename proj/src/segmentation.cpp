#include "leafid/segmentation.hpp"

#include "leafid/error.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace leafid {

void SegmentationConfig::validate() const {
    if (closing_radius_px < 1) throw Error(ErrorCode::InvalidArgument, "closing_radius_px must be >= 1");
    if (!(stem_area_loss_limit > 0.0 && stem_area_loss_limit < 1.0))
        throw Error(ErrorCode::InvalidArgument, "stem_area_loss_limit must lie in (0,1)");
    if (!(tophat_kernel_fraction > 0.0 && tophat_kernel_fraction < 1.0))
        throw Error(ErrorCode::InvalidArgument, "tophat_kernel_fraction must lie in (0,1)");
    if (grey_threshold_offset < 0 || grey_threshold_offset > 255 || saturation_threshold_offset < 0 ||
        saturation_threshold_offset > 255)
        throw Error(ErrorCode::InvalidArgument, "threshold offsets must lie in 0..255");
}

std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
    return static_cast<std::uint8_t>((299 * r + 587 * g + 114 * b + 500) / 1000);
}

std::uint8_t hsv_saturation(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
    const int hi = std::max({r, g, b});
    const int lo = std::min({r, g, b});
    if (hi == 0) return 0;
    return static_cast<std::uint8_t>((255 * (hi - lo) + hi / 2) / hi);
}

Image grey_plane(const Image& img) {
    if (img.channels() == 1) return img;
    Image out(img.width(), img.height(), 1);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) out.at(x, y) = luma(img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2));
    return out;
}

Image saturation_plane(const Image& img) {
    Image out(img.width(), img.height(), 1, 0);
    if (img.channels() == 1) return out;
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            out.at(x, y) = hsv_saturation(img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2));
    return out;
}

namespace {

std::uint8_t max_edge_mean(const Image& plane) {
    const int w = plane.width();
    const int h = plane.height();
    double top = 0, bottom = 0, left = 0, right = 0;
    for (int x = 0; x < w; ++x) {
        top += plane.at(x, 0);
        bottom += plane.at(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        left += plane.at(0, y);
        right += plane.at(w - 1, y);
    }
    const double m = std::max({top / w, bottom / w, left / h, right / h});
    return static_cast<std::uint8_t>(std::clamp(std::lround(m), 0L, 255L));
}

// Half-width of the disk row at vertical offset dy: largest w with w^2 + dy^2 <= r^2.
std::vector<int> disk_half_widths(int radius) {
    std::vector<int> hw(2 * radius + 1);
    for (int dy = -radius; dy <= radius; ++dy) {
        int w = static_cast<int>(std::sqrt(static_cast<double>(radius * radius - dy * dy)));
        while ((w + 1) * (w + 1) + dy * dy <= radius * radius) ++w;
        while (w > 0 && w * w + dy * dy > radius * radius) --w;
        hw[dy + radius] = w;
    }
    return hw;
}

// Row-wise prefix sums: sums[y*(w+1) + x] = foreground count in row y, columns [0, x).
std::vector<int> row_prefix(const BinaryMask& m) {
    const int w = m.width();
    std::vector<int> sums(static_cast<std::size_t>(w + 1) * m.height(), 0);
    for (int y = 0; y < m.height(); ++y) {
        int* row = sums.data() + static_cast<std::size_t>(y) * (w + 1);
        for (int x = 0; x < w; ++x) row[x + 1] = row[x] + m.at(x, y);
    }
    return sums;
}

enum class Morph { Dilate, Erode };

BinaryMask disk_filter(const BinaryMask& mask, int radius, Morph op) {
    if (radius < 1) throw Error(ErrorCode::InvalidArgument, "structuring element radius must be >= 1");
    const int w = mask.width();
    const int h = mask.height();
    const auto hw = disk_half_widths(radius);
    const auto sums = row_prefix(mask);
    BinaryMask out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            bool result = op == Morph::Erode;
            for (int dy = -radius; dy <= radius && result == (op == Morph::Erode); ++dy) {
                const int yy = y + dy;
                if (yy < 0 || yy >= h) continue;
                const int x0 = std::max(0, x - hw[dy + radius]);
                const int x1 = std::min(w - 1, x + hw[dy + radius]);
                const int* row = sums.data() + static_cast<std::size_t>(yy) * (w + 1);
                const int n = row[x1 + 1] - row[x0];
                if (op == Morph::Dilate && n > 0) result = true;
                if (op == Morph::Erode && n < x1 - x0 + 1) result = false;
            }
            out.at(x, y) = result ? 1 : 0;
        }
    }
    return out;
}

// One-dimensional square filter pass, horizontal when `horizontal` is set.
BinaryMask line_filter(const BinaryMask& mask, int side, Morph op, bool horizontal) {
    const int w = mask.width();
    const int h = mask.height();
    const int half = side / 2;
    BinaryMask out(w, h);
    const int outer = horizontal ? h : w;
    const int inner = horizontal ? w : h;
    std::vector<int> prefix(inner + 1);
    for (int o = 0; o < outer; ++o) {
        prefix[0] = 0;
        for (int i = 0; i < inner; ++i)
            prefix[i + 1] = prefix[i] + (horizontal ? mask.at(i, o) : mask.at(o, i));
        for (int i = 0; i < inner; ++i) {
            const int a = std::max(0, i - half);
            const int b = std::min(inner - 1, i + half);
            const int n = prefix[b + 1] - prefix[a];
            const bool v = op == Morph::Dilate ? n > 0 : n == b - a + 1;
            (horizontal ? out.at(i, o) : out.at(o, i)) = v ? 1 : 0;
        }
    }
    return out;
}

void check_side(int side) {
    if (side < 1 || side % 2 == 0)
        throw Error(ErrorCode::InvalidArgument, "square structuring element side must be odd and >= 1");
}

}  // namespace

Background estimate_background(const Image& img) {
    return {max_edge_mean(grey_plane(img)), max_edge_mean(saturation_plane(img))};
}

BinaryMask morph_dilate_disk(const BinaryMask& mask, int radius) { return disk_filter(mask, radius, Morph::Dilate); }
BinaryMask morph_erode_disk(const BinaryMask& mask, int radius) { return disk_filter(mask, radius, Morph::Erode); }

BinaryMask morph_close(const BinaryMask& mask, int radius) {
    return morph_erode_disk(morph_dilate_disk(mask, radius), radius);
}

BinaryMask morph_dilate_square(const BinaryMask& mask, int side) {
    check_side(side);
    return line_filter(line_filter(mask, side, Morph::Dilate, true), side, Morph::Dilate, false);
}

BinaryMask morph_erode_square(const BinaryMask& mask, int side) {
    check_side(side);
    return line_filter(line_filter(mask, side, Morph::Erode, true), side, Morph::Erode, false);
}

BinaryMask morph_open_square(const BinaryMask& mask, int side) {
    return morph_dilate_square(morph_erode_square(mask, side), side);
}

BinaryMask morph_tophat(const BinaryMask& mask, int side) { return mask - morph_open_square(mask, side); }

BinaryMask segment(const Image& img, const SegmentationConfig& cfg) {
    cfg.validate();
    const Background bg = estimate_background(img);
    const Image grey = grey_plane(img);
    const int grey_cut = static_cast<int>(bg.grey_level) - cfg.grey_threshold_offset;

    BinaryMask dark(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) dark.at(x, y) = grey.at(x, y) < grey_cut ? 1 : 0;
    BinaryMask result = morph_close(dark, cfg.closing_radius_px);

    if (img.channels() == 3) {
        const Image sat = saturation_plane(img);
        const int sat_cut = static_cast<int>(bg.saturation) + cfg.saturation_threshold_offset;
        BinaryMask vivid(img.width(), img.height());
        for (int y = 0; y < img.height(); ++y)
            for (int x = 0; x < img.width(); ++x) vivid.at(x, y) = sat.at(x, y) > sat_cut ? 1 : 0;
        result = result | morph_close(vivid, cfg.closing_radius_px);
    }

    if (result.count() == 0) throw Error(ErrorCode::EmptySegmentation, "no foreground after thresholding");
    return result;
}

int tophat_side(int width, int height, const SegmentationConfig& cfg) {
    const double raw = cfg.tophat_kernel_fraction * std::max(width, height);
    int side = static_cast<int>(std::lround(raw));
    if (side % 2 == 0) side += (raw >= side) ? 1 : -1;
    return std::max(side, 3);
}

BinaryMask remove_stem(const BinaryMask& mask, const SegmentationConfig& cfg) {
    cfg.validate();
    const int side = tophat_side(mask.width(), mask.height(), cfg);
    BinaryMask candidate = mask - morph_tophat(mask, side);
    const double before = static_cast<double>(mask.count());
    if (static_cast<double>(candidate.count()) < (1.0 - cfg.stem_area_loss_limit) * before) return mask;
    return candidate;
}

}  // namespace leafid
