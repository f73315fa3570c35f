#pragma once

#include "leafid/image.hpp"

#include <cstdint>

namespace leafid {

struct SegmentationConfig {
    int closing_radius_px = 5;
    /// Top-hat square side as a fraction of max(width, height), rounded to odd.
    double tophat_kernel_fraction = 0.03;
    /// Stem removal is skipped if it would remove more than this share of the area.
    double stem_area_loss_limit = 0.10;
    int grey_threshold_offset = 25;
    int saturation_threshold_offset = 25;

    void validate() const;
};

struct Background {
    std::uint8_t grey_level = 0;
    std::uint8_t saturation = 0;
};

/// ITU-R 601 luma, rounded.
std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept;
/// HSV saturation scaled to 0..255, rounded; 0 for black.
std::uint8_t hsv_saturation(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept;

/// Single-channel grey and saturation planes of an image (saturation is all
/// zero for greyscale input).
Image grey_plane(const Image& img);
Image saturation_plane(const Image& img);

/// Per channel, the largest of the four 1-pixel edge means.
Background estimate_background(const Image& img);

/// Dual threshold (darker than background, or more saturated), each closed with a
/// disk, then OR-ed. Throws EmptySegmentation when nothing survives.
BinaryMask segment(const Image& img, const SegmentationConfig& cfg = {});

/// Disk structuring element: offsets with dx*dx + dy*dy <= radius*radius.
/// Pixels outside the image read as background for dilation and foreground
/// for erosion, so closing never shrinks and opening never grows a mask.
BinaryMask morph_dilate_disk(const BinaryMask& mask, int radius);
BinaryMask morph_erode_disk(const BinaryMask& mask, int radius);
BinaryMask morph_close(const BinaryMask& mask, int radius);

/// Square structuring element of the given (odd) side.
BinaryMask morph_dilate_square(const BinaryMask& mask, int side);
BinaryMask morph_erode_square(const BinaryMask& mask, int side);
BinaryMask morph_open_square(const BinaryMask& mask, int side);
/// White top-hat: mask minus its opening.
BinaryMask morph_tophat(const BinaryMask& mask, int side);

/// Square side used by stem removal for an image of the given size.
int tophat_side(int width, int height, const SegmentationConfig& cfg);

BinaryMask remove_stem(const BinaryMask& mask, const SegmentationConfig& cfg = {});

}  // namespace leafid
