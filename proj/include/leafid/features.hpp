#pragma once

#include "leafid/contour.hpp"
#include "leafid/laii.hpp"

#include <array>
#include <complex>
#include <span>
#include <string>
#include <vector>

namespace leafid {

inline constexpr int kSignalLength = 256;
inline constexpr int kSpectrumBins = kSignalLength / 2 + 1;  // 129
inline constexpr int kBasicFeatureCount = 4;
inline constexpr int kStatFeatureCount = 10;
/// 10 statistics, AUC, bending energy, entropy, centroid, 129 spectrum bins.
inline constexpr int kFeaturesPerScale = kStatFeatureCount + 4 + kSpectrumBins;  // 143
inline constexpr int kEntropyBins = 128;

constexpr std::size_t feature_count(std::size_t num_scales) {
    return kBasicFeatureCount + num_scales * kFeaturesPerScale;
}

/// Ordering: solidity, circularity, rectangularity, compactness, then for each
/// scale ascending: mean/std of k, d1, d2, |d1|, |d2|; auc; bending_energy;
/// entropy; spectral_centroid; fft_000..fft_128.
struct FeatureVector {
    std::vector<double> values;
};

std::vector<std::string> feature_names(std::size_t num_scales);

struct BasicShape {
    double solidity = 0.0;
    double circularity = 0.0;
    double rectangularity = 0.0;
    /// Perimeter over area, per the original definition (not dimensionless).
    double compactness = 0.0;
};

/// Monotone-chain convex hull, counter-clockwise in (x, y) coordinates, no
/// collinear points.
std::vector<Point2d> convex_hull(std::span<const Point2d> pts);
/// Minimum-area enclosing rectangle area by rotating calipers over the hull.
double min_area_rect(std::span<const Point2d> hull);

BasicShape basic_shape_features(const Contour& contour);

/// Mean and population standard deviation of the signal, its circular first
/// and second differences, and their absolute values, in that order.
std::array<double, kStatFeatureCount> statistical_features(std::span<const double> k);

/// Circular trapezoidal integral over the sample index.
double area_under_curve(std::span<const double> k);

/// Mean of the squared entries.
double bending_energy(std::span<const double> k);

/// Natural-log Shannon entropy of a 128-bin histogram over [0, 1].
double signal_entropy(std::span<const double> k);

/// In-place iterative radix-2 FFT; size must be a power of two.
void fft_radix2(std::vector<std::complex<double>>& a);

/// |X_i| for i = 0..n/2 of the DFT of a real signal (n a power of two).
std::vector<double> rfft_magnitudes(std::span<const double> k);

struct Spectrum {
    /// Magnitudes normalised to sum 1; all zero for an all-zero signal.
    std::vector<double> magnitudes;
};

Spectrum rfft_spectrum(std::span<const double> k);

/// Magnitude-weighted mean bin index. Throws DegenerateSpectrum on zero mass.
double spectral_centroid(const Spectrum& s);

/// The 143 features of one LAII signal.
std::vector<double> laii_features(std::span<const double> k);

/// Concatenates basic shape and per-scale features. Throws LengthMismatch when
/// the number of signals differs from `expected_scales` or a signal is not 256 long.
FeatureVector assemble(const Contour& contour, std::span<const LaiiSignal> laiis, std::size_t expected_scales);

}  // namespace leafid
