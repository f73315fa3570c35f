#include "leafid/pipeline.hpp"

#include "leafid/error.hpp"

#include <optional>

namespace leafid {

Extraction extract(const Image& input, const PipelineConfig& cfg) {
    const Image img = cfg.resize_width > 0 && cfg.resize_height > 0
                          ? resize(input, cfg.resize_width, cfg.resize_height)
                          : input;
    Extraction ex;
    std::optional<Contour> chosen;
    try {
        ex.mask = segment(img, cfg.segmentation);
        if (cfg.remove_stems) ex.mask = remove_stem(ex.mask, cfg.segmentation);
        const auto contours = extract_contours(ex.mask);
        chosen = select_leaf_contour(contours, img.width(), img.height(), cfg.selection);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::EmptySegmentation && e.code() != ErrorCode::NoContour) throw;
    }

    if (chosen) {
        ex.contour = std::move(*chosen);
        if (cfg.laii_mask == LaiiMaskSource::SelectedContour)
            ex.mask = fill_polygon(ex.contour.points, img.width(), img.height());
    } else {
        auto fb = canny_fallback(img, cfg.selection);
        if (!fb) throw Error(ErrorCode::NoContour, "no leaf contour found by thresholding or edge fallback");
        ex.contour = std::move(fb->contour);
        ex.mask = std::move(fb->mask);
        ex.used_fallback = true;
    }

    ex.sampled = resample(ex.contour, kSignalLength);
    ex.laiis = laii_multiscale(ex.mask, ex.sampled, cfg.scales, cfg.laii_method);
    // The resampled polygon cuts the pixel staircase, so its perimeter is close to the true one.
    ex.features = assemble(Contour::from_points(ex.sampled.points), ex.laiis, cfg.scales.scales.size());
    return ex;
}

}  // namespace leafid
