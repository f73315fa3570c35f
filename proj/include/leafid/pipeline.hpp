#pragma once

#include "leafid/contour.hpp"
#include "leafid/features.hpp"
#include "leafid/laii.hpp"
#include "leafid/segmentation.hpp"

namespace leafid {

enum class LaiiMaskSource {
    /// The stem-free segmentation, as thresholded.
    Segmentation,
    /// Only the region enclosed by the selected contour (holes and other objects removed).
    SelectedContour,
};

struct PipelineConfig {
    SegmentationConfig segmentation;
    ContourSelectConfig selection;
    ScaleSet scales;
    LaiiMethod laii_method = LaiiMethod::Incremental;
    LaiiMaskSource laii_mask = LaiiMaskSource::Segmentation;
    bool remove_stems = true;
    /// When both are positive, images are resampled to this size first.
    int resize_width = 0;
    int resize_height = 0;
};

struct Extraction {
    BinaryMask mask;
    Contour contour;
    SampledContour sampled;
    std::vector<LaiiSignal> laiis;
    FeatureVector features;
    bool used_fallback = false;
};

/// Segmentation, stem removal, contour selection (with the edge-based
/// fallback), resampling, multi-scale LAIIs and feature assembly. Throws
/// NoContour when neither path yields a leaf boundary.
Extraction extract(const Image& img, const PipelineConfig& cfg = {});

}  // namespace leafid
