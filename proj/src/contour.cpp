#include "leafid/contour.hpp"

#include "leafid/error.hpp"
#include "leafid/segmentation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <fstream>
#include <tuple>

namespace leafid {

double signed_area(std::span<const Point2d> pts) {
    const std::size_t n = pts.size();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = pts[i];
        const auto& b = pts[(i + 1) % n];
        s += a.x * b.y - b.x * a.y;
    }
    return 0.5 * s;
}

double polygon_perimeter(std::span<const Point2d> pts) {
    const std::size_t n = pts.size();
    if (n < 2) return 0.0;
    double len = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = pts[i];
        const auto& b = pts[(i + 1) % n];
        len += std::hypot(b.x - a.x, b.y - a.y);
    }
    return len;
}

Contour Contour::from_points(std::vector<Point2d> points) {
    Contour c;
    const double sa = signed_area(points);
    if (sa > 0.0 && points.size() > 2) std::reverse(points.begin() + 1, points.end());
    c.area = std::abs(sa);
    c.perimeter = polygon_perimeter(points);
    c.points = std::move(points);
    return c;
}

Point2d Contour::centroid() const {
    const std::size_t n = points.size();
    if (n == 0) return {};
    const double a = signed_area(points);
    if (std::abs(a) > 1e-9) {
        double cx = 0, cy = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& p = points[i];
            const auto& q = points[(i + 1) % n];
            const double cross = p.x * q.y - q.x * p.y;
            cx += (p.x + q.x) * cross;
            cy += (p.y + q.y) * cross;
        }
        return {cx / (6.0 * a), cy / (6.0 * a)};
    }
    Point2d m;
    for (const auto& p : points) {
        m.x += p.x;
        m.y += p.y;
    }
    return {m.x / n, m.y / n};
}

void ContourSelectConfig::validate() const {
    auto in_unit = [](double v) { return v > 0.0 && v < 1.0; };
    if (!in_unit(min_perimeter_fraction) || !in_unit(max_center_distance_fraction))
        throw Error(ErrorCode::InvalidArgument, "contour selection fractions must lie in (0,1)");
    if (!(canny_low >= 0.0 && canny_high >= canny_low))
        throw Error(ErrorCode::InvalidArgument, "canny thresholds must satisfy 0 <= low <= high");
    if (!(canny_sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "canny_sigma must be positive");
    if (canny_closing_radius_px < 1) throw Error(ErrorCode::InvalidArgument, "canny_closing_radius_px must be >= 1");
}

namespace {

// Neighbour directions, counter-clockwise as displayed starting east.
constexpr std::array<int, 8> kDx{1, 1, 0, -1, -1, -1, 0, 1};
constexpr std::array<int, 8> kDy{0, -1, -1, -1, 0, 1, 1, 1};

class BorderFollower {
public:
    explicit BorderFollower(const BinaryMask& mask)
        : w_(mask.width() + 2), h_(mask.height() + 2), f_(static_cast<std::size_t>(w_) * h_, 0) {
        for (int y = 0; y < mask.height(); ++y)
            for (int x = 0; x < mask.width(); ++x) f_[idx(x + 1, y + 1)] = mask.at(x, y);
    }

    std::vector<Contour> run() {
        std::vector<Contour> outer;
        int nbd = 1;
        for (int y = 1; y < h_ - 1; ++y) {
            for (int x = 1; x < w_ - 1; ++x) {
                const int v = f_[idx(x, y)];
                if (v == 0) continue;
                if (v == 1 && f_[idx(x - 1, y)] == 0) {
                    ++nbd;
                    auto pts = trace(x, y, 4, nbd);
                    if (pts.size() >= 4) outer.push_back(Contour::from_points(std::move(pts)));
                } else if (v >= 1 && f_[idx(x + 1, y)] == 0) {
                    ++nbd;
                    trace(x, y, 0, nbd);
                }
            }
        }
        return outer;
    }

private:
    std::size_t idx(int x, int y) const { return static_cast<std::size_t>(y) * w_ + x; }
    int at(int x, int y, int dir) const { return f_[idx(x + kDx[dir], y + kDy[dir])]; }

    // Follows one border starting at (x, y); `dir2` points at the zero pixel
    // that triggered the border. Coordinates returned are unpadded.
    std::vector<Point2d> trace(int x, int y, int dir2, int nbd) {
        std::vector<Point2d> pts;
        int dir1 = -1;
        for (int k = 0; k < 8; ++k) {
            const int d = (dir2 - k + 8) % 8;
            if (at(x, y, d) != 0) {
                dir1 = d;
                break;
            }
        }
        if (dir1 < 0) {
            f_[idx(x, y)] = -nbd;
            pts.push_back({static_cast<double>(x - 1), static_cast<double>(y - 1)});
            return pts;
        }
        const int x1 = x + kDx[dir1];
        const int y1 = y + kDy[dir1];
        int x3 = x, y3 = y;
        int back = dir1;  // direction from the current pixel to the previous one
        while (true) {
            bool east_zero = false;
            int dir4 = back;
            for (int k = 1; k <= 8; ++k) {
                const int d = (back + k) % 8;
                if (at(x3, y3, d) != 0) {
                    dir4 = d;
                    break;
                }
                if (d == 0) east_zero = true;
            }
            int& cell = f_[idx(x3, y3)];
            if (east_zero)
                cell = -nbd;
            else if (cell == 1)
                cell = nbd;
            pts.push_back({static_cast<double>(x3 - 1), static_cast<double>(y3 - 1)});
            const int x4 = x3 + kDx[dir4];
            const int y4 = y3 + kDy[dir4];
            if (x4 == x && y4 == y && x3 == x1 && y3 == y1) break;
            back = (dir4 + 4) % 8;
            x3 = x4;
            y3 = y4;
        }
        return pts;
    }

    int w_;
    int h_;
    std::vector<int> f_;
};

auto selection_key(const Contour& c) {
    const Point2d first = c.points.empty() ? Point2d{} : c.points.front();
    return std::make_tuple(c.area, c.perimeter, -first.y, -first.x);
}

}  // namespace

std::vector<Contour> extract_contours(const BinaryMask& mask) {
    if (mask.count() == 0) throw Error(ErrorCode::NoContour, "mask has no foreground");
    auto contours = BorderFollower(mask).run();
    if (contours.empty()) throw Error(ErrorCode::NoContour, "no border with at least 4 points");
    return contours;
}

std::optional<Contour> select_leaf_contour(std::span<const Contour> contours, int width, int height,
                                           const ContourSelectConfig& cfg) {
    cfg.validate();
    const double min_len = cfg.min_perimeter_fraction * std::min(width, height);
    const double max_dist = cfg.max_center_distance_fraction * std::hypot(width, height);
    const Point2d centre{(width - 1) / 2.0, (height - 1) / 2.0};
    const Contour* best = nullptr;
    for (const auto& c : contours) {
        if (c.perimeter < min_len) continue;
        const Point2d m = c.centroid();
        if (std::hypot(m.x - centre.x, m.y - centre.y) > max_dist) continue;
        if (!best || selection_key(c) > selection_key(*best)) best = &c;
    }
    if (!best) return std::nullopt;
    return *best;
}

BinaryMask canny_edges(const Image& img, double sigma, double low, double high) {
    const Image grey = grey_plane(img);
    const int w = grey.width();
    const int h = grey.height();

    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(2 * radius + 1);
    double ksum = 0.0;
    for (int i = -radius; i <= radius; ++i) ksum += kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    for (auto& k : kernel) k /= ksum;

    auto clampi = [](int v, int lo, int hi) { return std::min(std::max(v, lo), hi); };
    std::vector<double> tmp(static_cast<std::size_t>(w) * h), smooth(tmp.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0;
            for (int i = -radius; i <= radius; ++i) s += kernel[i + radius] * grey.at(clampi(x + i, 0, w - 1), y);
            tmp[static_cast<std::size_t>(y) * w + x] = s;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0;
            for (int i = -radius; i <= radius; ++i)
                s += kernel[i + radius] * tmp[static_cast<std::size_t>(clampi(y + i, 0, h - 1)) * w + x];
            smooth[static_cast<std::size_t>(y) * w + x] = s;
        }

    auto px = [&](int x, int y) { return smooth[static_cast<std::size_t>(clampi(y, 0, h - 1)) * w + clampi(x, 0, w - 1)]; };
    std::vector<double> mag(smooth.size());
    std::vector<std::uint8_t> sector(smooth.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double gx = (px(x + 1, y - 1) + 2 * px(x + 1, y) + px(x + 1, y + 1)) -
                              (px(x - 1, y - 1) + 2 * px(x - 1, y) + px(x - 1, y + 1));
            const double gy = (px(x - 1, y + 1) + 2 * px(x, y + 1) + px(x + 1, y + 1)) -
                              (px(x - 1, y - 1) + 2 * px(x, y - 1) + px(x + 1, y - 1));
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            mag[i] = std::hypot(gx, gy);
            double angle = std::atan2(gy, gx) * 180.0 / 3.14159265358979323846;
            if (angle < 0) angle += 180.0;
            sector[i] = angle < 22.5 || angle >= 157.5 ? 0 : angle < 67.5 ? 1 : angle < 112.5 ? 2 : 3;
        }

    // Neighbour offsets across the gradient for each sector (0: horizontal gradient).
    constexpr std::array<std::array<int, 2>, 4> across{{{1, 0}, {1, 1}, {0, 1}, {-1, 1}}};
    auto m_at = [&](int x, int y) {
        return (x < 0 || y < 0 || x >= w || y >= h) ? 0.0 : mag[static_cast<std::size_t>(y) * w + x];
    };
    // 0 = none, 1 = weak, 2 = strong
    std::vector<std::uint8_t> cls(smooth.size(), 0);
    std::deque<std::pair<int, int>> queue;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            const double m = mag[i];
            if (m < low || m <= 0.0) continue;
            const auto [ox, oy] = across[sector[i]];
            // Ties resolved towards the lower/left neighbour so plateaus keep one pixel.
            if (m < m_at(x + ox, y + oy) || m <= m_at(x - ox, y - oy)) continue;
            if (m >= high) {
                cls[i] = 2;
                queue.emplace_back(x, y);
            } else {
                cls[i] = 1;
            }
        }

    BinaryMask edges(w, h);
    while (!queue.empty()) {
        const auto [x, y] = queue.front();
        queue.pop_front();
        edges.at(x, y) = 1;
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                const int nx = x + dx, ny = y + dy;
                if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                auto& c = cls[static_cast<std::size_t>(ny) * w + nx];
                if (c == 1) {
                    c = 2;
                    queue.emplace_back(nx, ny);
                }
            }
    }
    return edges;
}

BinaryMask fill_holes(const BinaryMask& mask) {
    const int w = mask.width();
    const int h = mask.height();
    BinaryMask outside(w, h);
    std::vector<std::pair<int, int>> stack;
    auto seed = [&](int x, int y) {
        if (!mask.at(x, y) && !outside.at(x, y)) {
            outside.at(x, y) = 1;
            stack.emplace_back(x, y);
        }
    };
    for (int x = 0; x < w; ++x) {
        seed(x, 0);
        seed(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        seed(0, y);
        seed(w - 1, y);
    }
    while (!stack.empty()) {
        const auto [x, y] = stack.back();
        stack.pop_back();
        if (x > 0) seed(x - 1, y);
        if (x + 1 < w) seed(x + 1, y);
        if (y > 0) seed(x, y - 1);
        if (y + 1 < h) seed(x, y + 1);
    }
    BinaryMask out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) out.at(x, y) = outside.at(x, y) ? 0 : 1;
    return out;
}

std::optional<FallbackResult> canny_fallback(const Image& img, const ContourSelectConfig& cfg) {
    cfg.validate();
    const BinaryMask edges = canny_edges(img, cfg.canny_sigma, cfg.canny_low, cfg.canny_high);
    if (edges.count() == 0) return std::nullopt;
    const BinaryMask filled = fill_holes(morph_close(edges, cfg.canny_closing_radius_px));
    std::vector<Contour> contours;
    try {
        contours = extract_contours(filled);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::NoContour) return std::nullopt;
        throw;
    }
    auto chosen = select_leaf_contour(contours, img.width(), img.height(), cfg);
    if (!chosen) return std::nullopt;
    BinaryMask region = fill_polygon(chosen->points, img.width(), img.height());
    return FallbackResult{std::move(*chosen), std::move(region)};
}

BinaryMask fill_polygon(std::span<const Point2d> polygon, int width, int height) {
    BinaryMask out(width, height);
    const std::size_t n = polygon.size();
    if (n == 0) return out;
    std::vector<double> xs;
    for (int y = 0; y < height; ++y) {
        xs.clear();
        const double py = y;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& a = polygon[i];
            const auto& b = polygon[(i + 1) % n];
            if ((a.y > py) != (b.y > py)) xs.push_back(a.x + (py - a.y) * (b.x - a.x) / (b.y - a.y));
        }
        std::sort(xs.begin(), xs.end());
        for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
            const int x0 = std::max(0, static_cast<int>(std::ceil(xs[k])));
            const int x1 = std::min(width - 1, static_cast<int>(std::floor(xs[k + 1])));
            for (int x = x0; x <= x1; ++x) out.at(x, y) = 1;
        }
    }
    // Pixel centres lying exactly on an edge belong to the shape.
    auto mark = [&](long x, long y) {
        if (out.contains(static_cast<int>(x), static_cast<int>(y))) out.at(static_cast<int>(x), static_cast<int>(y)) = 1;
    };
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = polygon[i];
        const auto& b = polygon[(i + 1) % n];
        const long y0 = static_cast<long>(std::ceil(std::min(a.y, b.y)));
        const long y1 = static_cast<long>(std::floor(std::max(a.y, b.y)));
        if (a.y == b.y) {
            if (a.y == static_cast<double>(y0))
                for (long x = static_cast<long>(std::ceil(std::min(a.x, b.x))); x <= std::floor(std::max(a.x, b.x)); ++x)
                    mark(x, y0);
            continue;
        }
        for (long y = std::max(y0, 0L); y <= std::min(y1, static_cast<long>(height) - 1); ++y) {
            const double x = a.x + (static_cast<double>(y) - a.y) * (b.x - a.x) / (b.y - a.y);
            const double rx = std::round(x);
            if (std::abs(x - rx) < 1e-9) mark(static_cast<long>(rx), y);
        }
    }
    return out;
}

SampledContour resample(const Contour& contour, int n) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "sample count must be positive");
    const auto& pts = contour.points;
    const double total = polygon_perimeter(pts);
    if (!(total > 1e-9)) throw Error(ErrorCode::DegenerateContour, "contour perimeter is zero");

    SampledContour out;
    out.perimeter = total;
    out.points.reserve(n);
    const std::size_t m = pts.size();
    std::size_t seg = 0;
    double seg_start = 0.0;  // arc length at pts[seg]
    double seg_len = std::hypot(pts[1 % m].x - pts[0].x, pts[1 % m].y - pts[0].y);
    for (int i = 0; i < n; ++i) {
        const double s = total * i / n;
        while (s > seg_start + seg_len && seg + 1 < m) {
            seg_start += seg_len;
            ++seg;
            const auto& a = pts[seg];
            const auto& b = pts[(seg + 1) % m];
            seg_len = std::hypot(b.x - a.x, b.y - a.y);
        }
        const auto& a = pts[seg];
        const auto& b = pts[(seg + 1) % m];
        const double t = seg_len > 0.0 ? std::clamp((s - seg_start) / seg_len, 0.0, 1.0) : 0.0;
        out.points.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
    }
    return out;
}

void write_points_csv(std::span<const Point2d> points, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string());
    out.precision(17);
    out << "x,y\n";
    for (const auto& p : points) out << p.x << ',' << p.y << '\n';
    if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

}  // namespace leafid
