#include "leafid/laii.hpp"

#include "leafid/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace leafid {

void ScaleSet::validate() const {
    if (scales.empty()) throw Error(ErrorCode::InvalidArgument, "scale set is empty");
    for (std::size_t i = 0; i < scales.size(); ++i) {
        if (!(scales[i] > 0.0 && scales[i] <= 50.0))
            throw Error(ErrorCode::InvalidArgument, "scales must lie in (0, 50]");
        if (i > 0 && !(scales[i] > scales[i - 1]))
            throw Error(ErrorCode::InvalidArgument, "scales must be strictly increasing");
    }
    if (min_radius_px < 1) throw Error(ErrorCode::InvalidArgument, "min_radius_px must be >= 1");
}

int laii_radius(double perimeter, double percent) {
    return static_cast<int>(std::lround(percent / 100.0 * perimeter));
}

namespace {

std::vector<int> half_widths(int r) {
    std::vector<int> hw(2 * r + 1);
    const long long rr = static_cast<long long>(r) * r;
    for (int d = -r; d <= r; ++d) {
        long long w = static_cast<long long>(std::sqrt(static_cast<double>(rr - static_cast<long long>(d) * d)));
        while ((w + 1) * (w + 1) + static_cast<long long>(d) * d <= rr) ++w;
        while (w > 0 && w * w + static_cast<long long>(d) * d > rr) --w;
        hw[d + r] = static_cast<int>(w);
    }
    return hw;
}

struct Pixel {
    int x;
    int y;
};

Pixel round_pixel(const Point2d& p) {
    return {static_cast<int>(std::lround(p.x)), static_cast<int>(std::lround(p.y))};
}

long long count_disk(const BinaryMask& mask, Pixel c, int r, const std::vector<int>& hw) {
    long long n = 0;
    for (int dy = -r; dy <= r; ++dy) {
        const int y = c.y + dy;
        if (y < 0 || y >= mask.height()) continue;
        const int x0 = std::max(0, c.x - hw[dy + r]);
        const int x1 = std::min(mask.width() - 1, c.x + hw[dy + r]);
        for (int x = x0; x <= x1; ++x) n += mask.at(x, y);
    }
    return n;
}

// Moves the disk one pixel along x (dir = +-1) updating the foreground count.
void step_x(const BinaryMask& mask, Pixel& c, int dir, int r, const std::vector<int>& hw, long long& n) {
    for (int dy = -r; dy <= r; ++dy) {
        const int w = hw[dy + r];
        const int y = c.y + dy;
        n -= mask.get(c.x - dir * w, y);
        n += mask.get(c.x + dir * (w + 1), y);
    }
    c.x += dir;
}

void step_y(const BinaryMask& mask, Pixel& c, int dir, int r, const std::vector<int>& hw, long long& n) {
    for (int dx = -r; dx <= r; ++dx) {
        const int h = hw[dx + r];
        const int x = c.x + dx;
        n -= mask.get(x, c.y - dir * h);
        n += mask.get(x, c.y + dir * (h + 1));
    }
    c.y += dir;
}

}  // namespace

std::size_t disk_pixel_count(int radius) {
    std::size_t n = 0;
    for (int w : half_widths(radius)) n += 2 * static_cast<std::size_t>(w) + 1;
    return n;
}

LaiiSignal laii_at_scale(const BinaryMask& mask, const SampledContour& sc, double percent, LaiiMethod method) {
    const int r = laii_radius(sc.perimeter, percent);
    if (r < 1) {
        throw Error(ErrorCode::RadiusTooSmall,
                    "scale " + std::to_string(percent) + "% gives radius " + std::to_string(r));
    }
    const auto hw = half_widths(r);
    double area = 0.0;
    for (int w : hw) area += 2.0 * w + 1.0;

    LaiiSignal sig;
    sig.scale_percent = percent;
    sig.radius = r;
    sig.values.reserve(sc.points.size());

    if (method == LaiiMethod::Reference) {
        for (const auto& p : sc.points)
            sig.values.push_back(static_cast<double>(count_disk(mask, round_pixel(p), r, hw)) / area);
        return sig;
    }

    if (sc.points.empty()) return sig;
    Pixel c = round_pixel(sc.points.front());
    long long n = count_disk(mask, c, r, hw);
    for (const auto& p : sc.points) {
        const Pixel target = round_pixel(p);
        // Long jumps are cheaper to recount than to slide.
        const long long steps = std::abs(target.x - c.x) + std::abs(target.y - c.y);
        if (steps > r) {
            c = target;
            n = count_disk(mask, c, r, hw);
        } else {
            while (c.x != target.x) step_x(mask, c, target.x > c.x ? 1 : -1, r, hw, n);
            while (c.y != target.y) step_y(mask, c, target.y > c.y ? 1 : -1, r, hw, n);
        }
        sig.values.push_back(static_cast<double>(n) / area);
    }
    return sig;
}

std::vector<LaiiSignal> laii_multiscale(const BinaryMask& mask, const SampledContour& sc, const ScaleSet& ss,
                                        LaiiMethod method) {
    ss.validate();
    for (double p : ss.scales) {
        const int r = laii_radius(sc.perimeter, p);
        if (r < ss.min_radius_px) {
            std::ostringstream msg;
            msg << "scale " << p << "% of perimeter " << sc.perimeter << " gives radius " << r << " < "
                << ss.min_radius_px;
            throw Error(ErrorCode::RadiusTooSmall, msg.str());
        }
    }
    std::vector<LaiiSignal> out;
    out.reserve(ss.scales.size());
    for (double p : ss.scales) out.push_back(laii_at_scale(mask, sc, p, method));
    return out;
}

void write_laii_csv(std::span<const LaiiSignal> signals, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string());
    out.precision(17);
    const std::size_t len = signals.empty() ? 0 : signals.front().values.size();
    out << "scale,radius";
    char name[32];
    for (std::size_t i = 0; i < len; ++i) {
        std::snprintf(name, sizeof name, "k%03zu", i);
        out << ',' << name;
    }
    out << '\n';
    for (const auto& s : signals) {
        out << s.scale_percent << ',' << s.radius;
        for (double v : s.values) out << ',' << v;
        out << '\n';
    }
    if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

}  // namespace leafid
