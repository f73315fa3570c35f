#pragma once

#include "leafid/contour.hpp"
#include "leafid/image.hpp"

#include <filesystem>
#include <span>
#include <vector>

namespace leafid {

/// Disk radii expressed as a percentage of the contour perimeter.
struct ScaleSet {
    std::vector<double> scales{1.0, 2.5, 5.0, 10.0, 15.0};
    int min_radius_px = 4;

    /// Profile for low-resolution corpora (around 256x256): the two finest scales dropped.
    static ScaleSet low_resolution() { return ScaleSet{{5.0, 10.0, 15.0}, 4}; }

    void validate() const;
    friend bool operator==(const ScaleSet&, const ScaleSet&) = default;
};

/// Local area integral invariant: for each boundary sample, the share of a disk
/// centred there that is covered by the mask.
struct LaiiSignal {
    std::vector<double> values;
    double scale_percent = 0.0;
    int radius = 0;
};

enum class LaiiMethod {
    /// Counts every disk pixel for every sample.
    Reference,
    /// Slides the disk between samples, updating the count with the pixels
    /// that enter and leave. Produces identical counts.
    Incremental,
};

/// round(percent/100 * perimeter).
int laii_radius(double perimeter, double percent);

/// Number of integer offsets (dx, dy) with dx^2 + dy^2 <= r^2.
std::size_t disk_pixel_count(int radius);

/// Disk centres are the samples rounded to the nearest pixel. Disk pixels
/// outside the image count as background. Throws RadiusTooSmall if r < 1.
LaiiSignal laii_at_scale(const BinaryMask& mask, const SampledContour& sc, double percent,
                         LaiiMethod method = LaiiMethod::Incremental);

/// One signal per scale, ascending. Any scale whose radius falls below
/// `min_radius_px` is rejected with RadiusTooSmall naming it.
std::vector<LaiiSignal> laii_multiscale(const BinaryMask& mask, const SampledContour& sc, const ScaleSet& ss,
                                        LaiiMethod method = LaiiMethod::Incremental);

/// CSV with one row per scale: `scale,radius,k000..k255`.
void write_laii_csv(std::span<const LaiiSignal> signals, const std::filesystem::path& path);

}  // namespace leafid
