#include "leafid/features.hpp"

#include "leafid/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace leafid {

std::vector<std::string> feature_names(std::size_t num_scales) {
    static const char* const stats[] = {"mean_k",      "std_k",      "mean_d1",     "std_d1",
                                        "mean_d2",     "std_d2",     "mean_abs_d1", "std_abs_d1",
                                        "mean_abs_d2", "std_abs_d2", "auc",         "bending_energy",
                                        "entropy",     "spectral_centroid"};
    std::vector<std::string> names{"solidity", "circularity", "rectangularity", "compactness"};
    char buf[48];
    for (std::size_t s = 0; s < num_scales; ++s) {
        for (const char* st : stats) {
            std::snprintf(buf, sizeof buf, "s%zu_%s", s, st);
            names.emplace_back(buf);
        }
        for (int i = 0; i < kSpectrumBins; ++i) {
            std::snprintf(buf, sizeof buf, "s%zu_fft_%03d", s, i);
            names.emplace_back(buf);
        }
    }
    return names;
}

namespace {

double cross(const Point2d& o, const Point2d& a, const Point2d& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double dot(double ax, double ay, double bx, double by) { return ax * bx + ay * by; }

struct Moments {
    double mean = 0.0;
    double std = 0.0;
};

Moments moments(std::span<const double> v) {
    if (v.empty()) return {};
    double sum = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(v.size()))};
}

std::vector<double> circular_diff(std::span<const double> k) {
    const std::size_t n = k.size();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = k[(i + 1) % n] - k[i];
    return d;
}

}  // namespace

std::vector<Point2d> convex_hull(std::span<const Point2d> input) {
    std::vector<Point2d> pts(input.begin(), input.end());
    std::sort(pts.begin(), pts.end(), [](const Point2d& a, const Point2d& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    std::vector<Point2d> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

double min_area_rect(std::span<const Point2d> hull) {
    const std::size_t n = hull.size();
    if (n < 3) return 0.0;
    auto proj = [&](std::size_t idx, double ex, double ey, const Point2d& o) {
        const auto& p = hull[idx % n];
        return dot(p.x - o.x, p.y - o.y, ex, ey);
    };
    double best = std::numeric_limits<double>::infinity();
    std::size_t far = 1, right = 1, left = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point2d& o = hull[i];
        const Point2d& q = hull[(i + 1) % n];
        const double len = std::hypot(q.x - o.x, q.y - o.y);
        const double ex = (q.x - o.x) / len, ey = (q.y - o.y) / len;
        const double nx = -ey, ny = ex;  // inward normal for a counter-clockwise hull
        if (i == 0) {
            // Seed the calipers with full scans; afterwards they only advance.
            for (std::size_t j = 0; j < n; ++j) {
                if (proj(j, nx, ny, o) > proj(far, nx, ny, o)) far = j;
                if (proj(j, ex, ey, o) > proj(right, ex, ey, o)) right = j;
                if (proj(j, ex, ey, o) < proj(left, ex, ey, o)) left = j;
            }
        } else {
            // Each caliper rotates monotonically with the edge direction; the
            // step bound only guards plateaus of equal projections.
            for (std::size_t s = 0; s < n && proj(far + 1, nx, ny, o) >= proj(far, nx, ny, o); ++s) far = (far + 1) % n;
            for (std::size_t s = 0; s < n && proj(right + 1, ex, ey, o) >= proj(right, ex, ey, o); ++s)
                right = (right + 1) % n;
            for (std::size_t s = 0; s < n && proj(left + 1, ex, ey, o) <= proj(left, ex, ey, o); ++s)
                left = (left + 1) % n;
        }
        const double height = proj(far, nx, ny, o);
        const double width = proj(right, ex, ey, o) - proj(left, ex, ey, o);
        best = std::min(best, height * width);
    }
    return best;
}

BasicShape basic_shape_features(const Contour& contour) {
    const double area = std::abs(signed_area(contour.points));
    const double perimeter = polygon_perimeter(contour.points);
    if (!(area > 1e-9)) throw Error(ErrorCode::DegenerateContour, "contour area is zero");
    const auto hull = convex_hull(contour.points);
    const double hull_area = std::abs(signed_area(hull));
    const double rect_area = min_area_rect(hull);
    BasicShape s;
    s.solidity = area / hull_area;
    s.circularity = 4.0 * std::numbers::pi * area / (perimeter * perimeter);
    s.rectangularity = area / rect_area;
    s.compactness = perimeter / area;
    return s;
}

std::array<double, kStatFeatureCount> statistical_features(std::span<const double> k) {
    const auto d1 = circular_diff(k);
    const auto d2 = circular_diff(d1);
    std::vector<double> a1(d1.size()), a2(d2.size());
    std::transform(d1.begin(), d1.end(), a1.begin(), [](double v) { return std::abs(v); });
    std::transform(d2.begin(), d2.end(), a2.begin(), [](double v) { return std::abs(v); });
    std::array<double, kStatFeatureCount> out{};
    std::size_t i = 0;
    for (std::span<const double> s : {k, std::span<const double>(d1), std::span<const double>(d2),
                                      std::span<const double>(a1), std::span<const double>(a2)}) {
        const auto m = moments(s);
        out[i++] = m.mean;
        out[i++] = m.std;
    }
    return out;
}

double area_under_curve(std::span<const double> k) {
    const std::size_t n = k.size();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += 0.5 * (k[i] + k[(i + 1) % n]);
    return s;
}

double bending_energy(std::span<const double> k) {
    if (k.empty()) return 0.0;
    double s = 0.0;
    for (double v : k) s += v * v;
    return s / static_cast<double>(k.size());
}

double signal_entropy(std::span<const double> k) {
    if (k.empty()) return 0.0;
    std::array<int, kEntropyBins> hist{};
    for (double v : k) {
        const int b = static_cast<int>(std::floor(std::clamp(v, 0.0, 1.0) * kEntropyBins));
        ++hist[std::min(b, kEntropyBins - 1)];
    }
    double h = 0.0;
    const double n = static_cast<double>(k.size());
    for (int c : hist) {
        if (c == 0) continue;
        const double q = c / n;
        h -= q * std::log(q);
    }
    return h;
}

void fft_radix2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) throw Error(ErrorCode::InvalidArgument, "FFT length must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t j = 0; j < len / 2; ++j) {
                // Twiddles computed directly rather than by recurrence to keep rounding error flat.
                const std::complex<double> w = std::polar(1.0, ang * static_cast<double>(j));
                const auto u = a[i + j];
                const auto v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
            }
        }
    }
}

std::vector<double> rfft_magnitudes(std::span<const double> k) {
    std::vector<std::complex<double>> a(k.begin(), k.end());
    fft_radix2(a);
    std::vector<double> mags(k.size() / 2 + 1);
    for (std::size_t i = 0; i < mags.size(); ++i) mags[i] = std::abs(a[i]);
    return mags;
}

Spectrum rfft_spectrum(std::span<const double> k) {
    Spectrum s{rfft_magnitudes(k)};
    double total = 0.0;
    for (double m : s.magnitudes) total += m;
    if (total > 0.0)
        for (double& m : s.magnitudes) m /= total;
    return s;
}

double spectral_centroid(const Spectrum& s) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < s.magnitudes.size(); ++i) {
        num += static_cast<double>(i) * s.magnitudes[i];
        den += s.magnitudes[i];
    }
    if (!(den > 0.0)) throw Error(ErrorCode::DegenerateSpectrum, "spectrum has no mass");
    return num / den;
}

std::vector<double> laii_features(std::span<const double> k) {
    if (k.size() != static_cast<std::size_t>(kSignalLength))
        throw Error(ErrorCode::LengthMismatch, "LAII signal must have 256 samples, got " + std::to_string(k.size()));
    std::vector<double> out;
    out.reserve(kFeaturesPerScale);
    const auto st = statistical_features(k);
    out.insert(out.end(), st.begin(), st.end());
    out.push_back(area_under_curve(k));
    out.push_back(bending_energy(k));
    out.push_back(signal_entropy(k));
    const Spectrum spec = rfft_spectrum(k);
    out.push_back(spectral_centroid(spec));
    out.insert(out.end(), spec.magnitudes.begin(), spec.magnitudes.end());
    return out;
}

FeatureVector assemble(const Contour& contour, std::span<const LaiiSignal> laiis, std::size_t expected_scales) {
    if (laiis.size() != expected_scales)
        throw Error(ErrorCode::LengthMismatch, "expected " + std::to_string(expected_scales) + " LAII scales, got " +
                                                   std::to_string(laiis.size()));
    for (std::size_t i = 1; i < laiis.size(); ++i)
        if (!(laiis[i].scale_percent > laiis[i - 1].scale_percent))
            throw Error(ErrorCode::InvalidArgument, "LAII signals must be in ascending scale order");
    FeatureVector fv;
    fv.values.reserve(feature_count(expected_scales));
    const BasicShape b = basic_shape_features(contour);
    fv.values.insert(fv.values.end(), {b.solidity, b.circularity, b.rectangularity, b.compactness});
    for (const auto& sig : laiis) {
        const auto f = laii_features(sig.values);
        fv.values.insert(fv.values.end(), f.begin(), f.end());
    }
    if (fv.values.size() != feature_count(expected_scales))
        throw Error(ErrorCode::LengthMismatch, "assembled feature vector has the wrong length");
    return fv;
}

}  // namespace leafid
