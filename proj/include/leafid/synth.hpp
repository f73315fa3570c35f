#pragma once

#include "leafid/contour.hpp"
#include "leafid/dataset.hpp"
#include "leafid/image.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace leafid {

enum class ShapeKind { Disk, Square, Star, SerratedEllipse, Lobed };

struct ShapeFamily {
    std::string name;
    ShapeKind kind = ShapeKind::Disk;
    int points = 5;          // star tips
    double inner = 0.5;      // star inner radius ratio
    double aspect = 0.55;    // ellipse minor/major
    int teeth = 0;           // serration count (0 = smooth)
    double amplitude = 0.0;  // serration depth relative to radius
    int lobes = 3;
    double depth = 0.35;     // lobe depth
};

/// Random pose and boundary perturbation for one rendered shape.
struct ShapePose {
    double rotation_deg = 0.0;
    /// Fraction of the largest radius that fits the raster.
    double scale = 1.0;
    double offset_x = 0.0;  // fractions of the raster side
    double offset_y = 0.0;
    /// Low-order radial harmonics (orders 2..4): amplitude and phase.
    std::vector<double> harmonic_amp;
    std::vector<double> harmonic_phase;
};

struct SynthSpec {
    int raster = 512;
    int per_class = 40;
    double rotation_min_deg = 0.0;
    double rotation_max_deg = 360.0;
    double scale_min = 0.7;
    double scale_max = 1.0;
    /// Amplitude of the low-order radial perturbation.
    double jitter = 0.04;
    /// Maximum centre displacement as a fraction of the raster side.
    double offset = 0.04;
    std::vector<ShapeFamily> families;

    /// Disk, square, 5-star, serrated ellipse (24 teeth), three-lobed leaf.
    static SynthSpec default_spec();
    static SynthSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

/// Closed boundary in pixel coordinates for a raster of the given side.
std::vector<Point2d> shape_polygon(const ShapeFamily& family, const ShapePose& pose, int raster);

/// Dark shape (0) on a white (255) single-channel background.
Image render_shape(const ShapeFamily& family, const ShapePose& pose, int raster);

/// Pose for image `index` of class `class_index`, a pure function of the seed.
ShapePose sample_pose(const SynthSpec& spec, std::uint64_t seed, int class_index, int index);

struct SynthItem {
    int label = 0;
    ShapePose pose;
    Image image;
};

std::vector<SynthItem> synth_images(const SynthSpec& spec, std::uint64_t seed);

/// Writes root/<family>/<family>_NNNN.png and returns the loaded dataset.
Dataset synth_corpus(const SynthSpec& spec, std::uint64_t seed, const std::filesystem::path& root);

}  // namespace leafid
