#pragma once

#include "leafid/image.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace leafid {

struct Point2d {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2d&, const Point2d&) = default;
};

/// Closed pixel boundary. Points run counter-clockwise as displayed (y axis
/// pointing down), which makes the raw shoelace sum negative; `area` holds its
/// absolute value. The edge from the last point back to the first is implicit.
struct Contour {
    std::vector<Point2d> points;
    double perimeter = 0.0;
    double area = 0.0;

    /// Builds a contour from an ordered closed point list, fixing orientation
    /// (the first point is kept) and computing area and perimeter.
    static Contour from_points(std::vector<Point2d> points);

    Point2d centroid() const;
};

/// Arc-length uniform resampling of a contour.
struct SampledContour {
    std::vector<Point2d> points;
    double perimeter = 0.0;
};

struct ContourSelectConfig {
    double min_perimeter_fraction = 0.10;
    double max_center_distance_fraction = 0.25;
    /// Hysteresis thresholds on the Sobel gradient magnitude of the smoothed image.
    double canny_low = 40.0;
    double canny_high = 100.0;
    double canny_sigma = 1.4;
    int canny_closing_radius_px = 5;

    void validate() const;
};

/// Shoelace sum over the closed polygon (positive for clockwise-as-displayed).
double signed_area(std::span<const Point2d> pts);
double polygon_perimeter(std::span<const Point2d> pts);

/// Suzuki-Abe border following over 8-connected foreground. Returns the outer
/// border of every component; hole borders are traced (they drive the
/// labelling) but discarded. Borders of fewer than 4 points are dropped.
/// Throws NoContour if nothing remains.
std::vector<Contour> extract_contours(const BinaryMask& mask);

/// Largest-area contour that is long enough and close enough to the image centre.
std::optional<Contour> select_leaf_contour(std::span<const Contour> contours, int width, int height,
                                           const ContourSelectConfig& cfg = {});

/// Canny edge map: Gaussian smoothing, Sobel gradients, non-maximum
/// suppression and double-threshold hysteresis.
BinaryMask canny_edges(const Image& img, double sigma, double low, double high);

/// Sets every background pixel not 4-connected to the image border.
BinaryMask fill_holes(const BinaryMask& mask);

struct FallbackResult {
    Contour contour;
    /// Filled region bounded by the contour, usable as an LAII mask.
    BinaryMask mask;
};

/// Edge-based recovery used when thresholding yields no acceptable contour.
std::optional<FallbackResult> canny_fallback(const Image& img, const ContourSelectConfig& cfg = {});

/// Marks pixels whose centres lie inside the polygon (even-odd rule) or on
/// one of its edges.
BinaryMask fill_polygon(std::span<const Point2d> polygon, int width, int height);

/// Points at arc lengths i*L/n along the closed boundary, starting at the first point.
SampledContour resample(const Contour& contour, int n = 256);

void write_points_csv(std::span<const Point2d> points, const std::filesystem::path& path);

}  // namespace leafid
