#pragma once

// Slow, direct reference implementations used to check the library.

#include "leafid/contour.hpp"
#include "leafid/image.hpp"
#include "leafid/reduce.hpp"
#include "leafid/rng.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

namespace oracle {

using leafid::BinaryMask;
using leafid::Point2d;

inline BinaryMask disk_mask(int w, int h, double cx, double cy, double radius) {
    BinaryMask m(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= radius * radius) m.at(x, y) = 1;
    return m;
}

inline BinaryMask rect_mask(int w, int h, int x0, int y0, int x1, int y1) {
    BinaryMask m(w, h);
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) m.at(x, y) = 1;
    return m;
}

// Structuring element given as a list of offsets.
inline std::vector<std::pair<int, int>> disk_offsets(int r) {
    std::vector<std::pair<int, int>> o;
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
            if (dx * dx + dy * dy <= r * r) o.emplace_back(dx, dy);
    return o;
}

inline std::vector<std::pair<int, int>> square_offsets(int side) {
    std::vector<std::pair<int, int>> o;
    const int h = side / 2;
    for (int dy = -h; dy <= h; ++dy)
        for (int dx = -h; dx <= h; ++dx) o.emplace_back(dx, dy);
    return o;
}

// Max filter; outside pixels are background.
inline BinaryMask dilate(const BinaryMask& m, const std::vector<std::pair<int, int>>& se) {
    BinaryMask out(m.width(), m.height());
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x)
            for (auto [dx, dy] : se)
                if (m.get(x + dx, y + dy)) {
                    out.at(x, y) = 1;
                    break;
                }
    return out;
}

// Min filter; outside pixels are foreground.
inline BinaryMask erode(const BinaryMask& m, const std::vector<std::pair<int, int>>& se) {
    BinaryMask out(m.width(), m.height());
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x) {
            bool all = true;
            for (auto [dx, dy] : se) {
                const int u = x + dx, v = y + dy;
                if (m.contains(u, v) && !m.at(u, v)) {
                    all = false;
                    break;
                }
            }
            out.at(x, y) = all;
        }
    return out;
}

inline std::vector<double> dft_magnitudes(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<double> mag(n / 2 + 1);
    for (std::size_t k = 0; k <= n / 2; ++k) {
        std::complex<double> s = 0.0;
        for (std::size_t t = 0; t < n; ++t)
            s += x[t] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * t % n) / static_cast<double>(n));
        mag[k] = std::abs(s);
    }
    return mag;
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Two-pass population standard deviation.
inline double stddev(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

// Cyclic Jacobi eigenvalue iteration for a symmetric matrix (row-major n x n).
// Returns eigenvalues and eigenvectors (as columns of `vectors`), unsorted.
struct EigenSystem {
    std::vector<double> values;
    std::vector<std::vector<double>> vectors;  // vectors[i] is the i-th eigenvector
};

inline EigenSystem jacobi(std::vector<std::vector<double>> a) {
    const std::size_t n = a.size();
    std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v[k][p], vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
    }
    EigenSystem e;
    for (std::size_t i = 0; i < n; ++i) {
        e.values.push_back(a[i][i]);
        std::vector<double> col(n);
        for (std::size_t k = 0; k < n; ++k) col[k] = v[k][i];
        e.vectors.push_back(col);
    }
    return e;
}

// Euclidean projection onto {0 <= a_i <= c_i, sum y_i a_i = 0} by bisection on the multiplier.
inline std::vector<double> project_dual(const std::vector<double>& v, const std::vector<int>& y,
                                        const std::vector<double>& c) {
    auto clipped = [&](double lambda) {
        std::vector<double> a(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) a[i] = std::clamp(v[i] - lambda * y[i], 0.0, c[i]);
        return a;
    };
    auto g = [&](double lambda) {
        const auto a = clipped(lambda);
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += y[i] * a[i];
        return s;
    };
    double lo = -1e7, hi = 1e7;  // g is non-increasing in lambda
    for (int it = 0; it < 300; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > 0 ? lo : hi) = mid;
    }
    return clipped(0.5 * (lo + hi));
}

// Maximises sum(a) - 1/2 a'Qa over the dual feasible set by accelerated projected gradient.
inline std::vector<double> solve_dual_qp(const std::vector<std::vector<double>>& q, const std::vector<int>& y,
                                         const std::vector<double>& c, int iterations = 200000) {
    const std::size_t n = y.size();
    double lipschitz = 0.0;  // Gershgorin bound on the largest eigenvalue
    for (const auto& row : q) {
        double s = 0.0;
        for (double x : row) s += std::abs(x);
        lipschitz = std::max(lipschitz, s);
    }
    const double step = 1.0 / lipschitz;
    std::vector<double> a(n, 0.0), prev = a, z = a;
    double t = 1.0;
    for (int it = 0; it < iterations; ++it) {
        std::vector<double> grad(n, 1.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) grad[i] -= q[i][j] * z[j];
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = z[i] + step * grad[i];
        prev = a;
        a = project_dual(v, y, c);
        const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        double moved = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            z[i] = a[i] + (t - 1.0) / tn * (a[i] - prev[i]);
            moved = std::max(moved, std::abs(a[i] - prev[i]));
        }
        t = tn;
        if (it > 1000 && moved < 1e-15) break;
    }
    return a;
}

inline double dual_value(const std::vector<std::vector<double>>& q, const std::vector<double>& a) {
    double lin = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        lin += a[i];
        for (std::size_t j = 0; j < a.size(); ++j) quad += a[i] * a[j] * q[i][j];
    }
    return lin - 0.5 * quad;
}

// Share of a disk of radius r, centred at distance d from the centre of a
// circle of radius R, that lies inside the circle. Simpson integration of the
// overlap of vertical chords.
inline double lens_fraction(double big_r, double r, double d, int intervals = 20000) {
    auto overlap = [&](double x) {
        const double h1 = r * r - (x - d) * (x - d);
        const double h2 = big_r * big_r - x * x;
        if (h1 <= 0 || h2 <= 0) return 0.0;
        return 2.0 * std::min(std::sqrt(h1), std::sqrt(h2));
    };
    const double a = d - r, b = d + r, h = (b - a) / intervals;
    double s = overlap(a) + overlap(b);
    for (int i = 1; i < intervals; ++i) s += overlap(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0 / (std::numbers::pi * r * r);
}

// Smallest bounding-box area over every direction defined by a pair of points.
inline double min_rect_area(const std::vector<Point2d>& pts) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const double dx = pts[j].x - pts[i].x, dy = pts[j].y - pts[i].y;
            const double len = std::hypot(dx, dy);
            if (len < 1e-12) continue;
            const double ux = dx / len, uy = dy / len;
            double a0 = 1e300, a1 = -1e300, b0 = 1e300, b1 = -1e300;
            for (const auto& p : pts) {
                const double a = p.x * ux + p.y * uy, b = -p.x * uy + p.y * ux;
                a0 = std::min(a0, a);
                a1 = std::max(a1, a);
                b0 = std::min(b0, b);
                b1 = std::max(b1, b);
            }
            best = std::min(best, (a1 - a0) * (b1 - b0));
        }
    return best;
}

inline double shoelace_area(const std::vector<Point2d>& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto& a = p[i];
        const auto& b = p[(i + 1) % p.size()];
        s += a.x * b.y - b.x * a.y;
    }
    return std::abs(s) / 2.0;
}

// Direct disk count around a rounded centre; outside pixels count as background.
inline double laii_point(const BinaryMask& m, Point2d c, int r) {
    const long cx = std::lround(c.x), cy = std::lround(c.y);
    long in = 0, total = 0;
    for (long dy = -r; dy <= r; ++dy)
        for (long dx = -r; dx <= r; ++dx)
            if (dx * dx + dy * dy <= static_cast<long>(r) * r) {
                ++total;
                in += m.get(static_cast<int>(cx + dx), static_cast<int>(cy + dy));
            }
    return static_cast<double>(in) / static_cast<double>(total);
}

inline std::vector<double> random_signal(leafid::Rng& rng, std::size_t n = 256) {
    std::vector<double> s(n);
    for (auto& x : s) x = rng.uniform();
    return s;
}

inline std::vector<double> circular_diff(const std::vector<double>& v) {
    std::vector<double> d(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) d[i] = v[(i + 1) % v.size()] - v[i];
    return d;
}

inline std::vector<double> absolute(std::vector<double> v) {
    for (auto& x : v) x = std::abs(x);
    return v;
}

// Mean and std of k, d1, d2, |d1|, |d2|.
inline std::vector<double> signal_stats(const std::vector<double>& k) {
    const auto d1 = circular_diff(k);
    const auto d2 = circular_diff(d1);
    std::vector<double> out;
    for (const auto& s : {k, d1, d2, absolute(d1), absolute(d2)}) {
        out.push_back(mean(s));
        out.push_back(stddev(s));
    }
    return out;
}

// Shannon entropy (nats) of a 128-bin histogram over [0,1].
inline double signal_entropy(const std::vector<double>& k) {
    std::vector<double> counts(128, 0.0);
    for (double v : k) counts[static_cast<std::size_t>(std::clamp(static_cast<int>(v * 128.0), 0, 127))] += 1.0;
    double h = 0.0;
    for (double c : counts)
        if (c > 0) {
            const double q = c / static_cast<double>(k.size());
            h -= q * std::log(q);
        }
    return h;
}

// Q_ij = y_i y_j exp(-gamma |x_i - x_j|^2).
inline std::vector<std::vector<double>> signed_gram(const leafid::Matrix& x, const std::vector<int>& y, double gamma) {
    const auto n = static_cast<std::size_t>(x.rows());
    std::vector<std::vector<double>> q(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double d = 0.0;
            for (Eigen::Index c = 0; c < x.cols(); ++c) {
                const double t = x(static_cast<Eigen::Index>(i), c) - x(static_cast<Eigen::Index>(j), c);
                d += t * t;
            }
            q[i][j] = y[i] * y[j] * std::exp(-gamma * d);
        }
    return q;
}

}  // namespace oracle
