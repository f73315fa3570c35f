#include "leafid/synth.hpp"

#include "leafid/error.hpp"
#include "leafid/rng.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

namespace fs = std::filesystem;

namespace leafid {

namespace {

constexpr int kBoundaryVertices = 4096;
constexpr double kPi = std::numbers::pi;

const char* kind_name(ShapeKind k) {
    switch (k) {
        case ShapeKind::Disk: return "disk";
        case ShapeKind::Square: return "square";
        case ShapeKind::Star: return "star";
        case ShapeKind::SerratedEllipse: return "serrated_ellipse";
        case ShapeKind::Lobed: return "lobed";
    }
    return "disk";
}

ShapeKind parse_kind(const std::string& s) {
    for (auto k : {ShapeKind::Disk, ShapeKind::Square, ShapeKind::Star, ShapeKind::SerratedEllipse, ShapeKind::Lobed})
        if (s == kind_name(k)) return k;
    throw Error(ErrorCode::InvalidArgument, "unknown shape kind: " + s);
}

// Radius along theta of a star whose vertices alternate between 1 and `inner`.
double star_radius(double theta, int tips, double inner) {
    const double sector = kPi / tips;
    double t = std::fmod(theta, 2.0 * sector);
    if (t < 0) t += 2.0 * sector;
    // Edge from (1, 0) to (inner, sector) in polar form.
    const double ax = 1.0, ay = 0.0;
    const double bx = inner * std::cos(sector), by = inner * std::sin(sector);
    const double u = t > sector ? 2.0 * sector - t : t;  // mirror into the first half-sector
    const double r0x = ax, r0y = ay, r1x = bx, r1y = by;
    // Ray (cos u, sin u) against the segment r0 -> r1.
    const double dx = r1x - r0x, dy = r1y - r0y;
    const double c = std::cos(u), s = std::sin(u);
    const double den = c * dy - s * dx;
    return (r0x * dy - r0y * dx) / den;
}

double base_radius(const ShapeFamily& f, double theta) {
    switch (f.kind) {
        case ShapeKind::Disk: return 1.0;
        case ShapeKind::Square: return 0.8 / std::max(std::abs(std::cos(theta)), std::abs(std::sin(theta)));
        case ShapeKind::Star: return star_radius(theta, f.points, f.inner);
        case ShapeKind::SerratedEllipse: {
            const double a = 1.0, b = f.aspect;
            const double r = a * b / std::hypot(b * std::cos(theta), a * std::sin(theta));
            if (f.teeth <= 0 || f.amplitude <= 0.0) return r;
            // Asymmetric saw teeth pointing forward, as on a serrate margin.
            double phase = std::fmod(theta * f.teeth / (2.0 * kPi), 1.0);
            if (phase < 0) phase += 1.0;
            const double tooth = phase < 0.7 ? phase / 0.7 : (1.0 - phase) / 0.3;
            return r * (1.0 - f.amplitude + f.amplitude * tooth);
        }
        case ShapeKind::Lobed: {
            const double lobe = std::pow(std::abs(std::cos(0.5 * f.lobes * (theta - kPi / 2))), 0.8);
            // A pointed apex at the top and a narrower base.
            const double apex = 0.25 * std::exp(-std::pow((theta - kPi / 2) / 0.25, 2));
            return (1.0 - f.depth) + f.depth * lobe + apex;
        }
    }
    return 1.0;
}

double max_base_radius(const ShapeFamily& f) {
    double m = 0.0;
    for (int i = 0; i < kBoundaryVertices; ++i) m = std::max(m, base_radius(f, 2.0 * kPi * i / kBoundaryVertices));
    return m;
}

}  // namespace

SynthSpec SynthSpec::default_spec() {
    SynthSpec s;
    ShapeFamily disk{.name = "disk", .kind = ShapeKind::Disk};
    ShapeFamily square{.name = "square", .kind = ShapeKind::Square};
    ShapeFamily star{.name = "star", .kind = ShapeKind::Star, .points = 5, .inner = 0.5};
    ShapeFamily serrated{.name = "serrated_ellipse", .kind = ShapeKind::SerratedEllipse, .aspect = 0.55,
                         .teeth = 24, .amplitude = 0.06};
    ShapeFamily lobed{.name = "lobed", .kind = ShapeKind::Lobed, .lobes = 3, .depth = 0.35};
    s.families = {disk, square, star, serrated, lobed};
    return s;
}

SynthSpec SynthSpec::from_json(const nlohmann::json& j) {
    SynthSpec s;
    s.raster = j.value("raster", s.raster);
    s.per_class = j.value("per_class", s.per_class);
    if (j.contains("rotation_deg")) {
        s.rotation_min_deg = j.at("rotation_deg").at(0).get<double>();
        s.rotation_max_deg = j.at("rotation_deg").at(1).get<double>();
    }
    if (j.contains("scale")) {
        s.scale_min = j.at("scale").at(0).get<double>();
        s.scale_max = j.at("scale").at(1).get<double>();
    }
    s.jitter = j.value("jitter", s.jitter);
    s.offset = j.value("offset", s.offset);
    if (j.contains("families")) {
        for (const auto& fj : j.at("families")) {
            ShapeFamily f;
            f.kind = parse_kind(fj.at("kind").get<std::string>());
            f.name = fj.value("name", std::string(kind_name(f.kind)));
            f.points = fj.value("points", f.points);
            f.inner = fj.value("inner", f.inner);
            f.aspect = fj.value("aspect", f.aspect);
            f.teeth = fj.value("teeth", f.teeth);
            f.amplitude = fj.value("amplitude", f.amplitude);
            f.lobes = fj.value("lobes", f.lobes);
            f.depth = fj.value("depth", f.depth);
            s.families.push_back(std::move(f));
        }
    } else {
        s.families = default_spec().families;
    }
    if (s.raster < Image::kMinSide) throw Error(ErrorCode::InvalidArgument, "raster too small");
    if (s.per_class < 1) throw Error(ErrorCode::InvalidArgument, "per_class must be >= 1");
    if (s.families.empty()) throw Error(ErrorCode::InvalidArgument, "no shape families");
    if (!(s.scale_min > 0.0 && s.scale_max >= s.scale_min && s.scale_max <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "scale range must lie in (0, 1]");
    return s;
}

nlohmann::json SynthSpec::to_json() const {
    nlohmann::json fams = nlohmann::json::array();
    for (const auto& f : families)
        fams.push_back({{"name", f.name},   {"kind", kind_name(f.kind)}, {"points", f.points},
                        {"inner", f.inner}, {"aspect", f.aspect},        {"teeth", f.teeth},
                        {"amplitude", f.amplitude}, {"lobes", f.lobes},  {"depth", f.depth}});
    return {{"raster", raster},
            {"per_class", per_class},
            {"rotation_deg", {rotation_min_deg, rotation_max_deg}},
            {"scale", {scale_min, scale_max}},
            {"jitter", jitter},
            {"offset", offset},
            {"families", fams}};
}

std::vector<Point2d> shape_polygon(const ShapeFamily& family, const ShapePose& pose, int raster) {
    // Largest radius leaves a 10% margin to the raster edge.
    const double norm = max_base_radius(family);
    const double radius_px = pose.scale * 0.4 * raster / norm;
    const double rot = pose.rotation_deg * kPi / 180.0;
    const double cx = raster / 2.0 - 0.5 + pose.offset_x * raster;
    const double cy = raster / 2.0 - 0.5 + pose.offset_y * raster;
    std::vector<Point2d> poly;
    poly.reserve(kBoundaryVertices);
    for (int i = 0; i < kBoundaryVertices; ++i) {
        const double theta = 2.0 * kPi * i / kBoundaryVertices;
        double r = base_radius(family, theta);
        for (std::size_t h = 0; h < pose.harmonic_amp.size(); ++h)
            r *= 1.0 + pose.harmonic_amp[h] * std::cos((h + 2) * theta + pose.harmonic_phase[h]);
        const double a = theta + rot;
        // y axis points down; positive rotation turns counter-clockwise on screen.
        poly.push_back({cx + radius_px * r * std::cos(a), cy - radius_px * r * std::sin(a)});
    }
    return poly;
}

Image render_shape(const ShapeFamily& family, const ShapePose& pose, int raster) {
    const BinaryMask m = fill_polygon(shape_polygon(family, pose, raster), raster, raster);
    return mask_to_image(m, 0, 255);
}

ShapePose sample_pose(const SynthSpec& spec, std::uint64_t seed, int class_index, int index) {
    Rng rng(mix_seed(seed ^ mix_seed((static_cast<std::uint64_t>(class_index) << 32) ^
                                     static_cast<std::uint64_t>(index))));
    ShapePose p;
    p.rotation_deg = rng.uniform(spec.rotation_min_deg, spec.rotation_max_deg);
    p.scale = rng.uniform(spec.scale_min, spec.scale_max);
    p.offset_x = rng.uniform(-spec.offset, spec.offset);
    p.offset_y = rng.uniform(-spec.offset, spec.offset);
    for (int h = 0; h < 3; ++h) {
        p.harmonic_amp.push_back(spec.jitter * rng.uniform(-1.0, 1.0) / 3.0);
        p.harmonic_phase.push_back(rng.uniform(0.0, 2.0 * kPi));
    }
    return p;
}

std::vector<SynthItem> synth_images(const SynthSpec& spec, std::uint64_t seed) {
    std::vector<SynthItem> out;
    for (int c = 0; c < static_cast<int>(spec.families.size()); ++c)
        for (int i = 0; i < spec.per_class; ++i) {
            ShapePose pose = sample_pose(spec, seed, c, i);
            Image img = render_shape(spec.families[c], pose, spec.raster);
            out.push_back({c, std::move(pose), std::move(img)});
        }
    return out;
}

Dataset synth_corpus(const SynthSpec& spec, std::uint64_t seed, const fs::path& root) {
    fs::create_directories(root);
    for (int c = 0; c < static_cast<int>(spec.families.size()); ++c) {
        const auto& fam = spec.families[c];
        const fs::path dir = root / fam.name;
        fs::create_directories(dir);
        for (int i = 0; i < spec.per_class; ++i) {
            char name[64];
            std::snprintf(name, sizeof name, "_%04d.png", i);
            write_png(render_shape(fam, sample_pose(spec, seed, c, i), spec.raster), dir / (fam.name + name));
        }
    }
    return load_dataset(root);
}

}  // namespace leafid
