#pragma once

#include "dmad/core/tensor.hpp"
#include "dmad/dataio/image.hpp"

namespace dmad::preprocess {

// Constant-depth background plane.
struct PlaneModel {
    Real z0 = 0;
};

struct PreprocessConfig {
    Real tau = 0.02;  // foreground distance threshold, scene units
};

// Every invalid pixel takes the depth of its nearest valid pixel (Euclidean
// pixel distance, ties resolved toward the earlier pixel in row-major order).
// Valid pixels are untouched. Throws ArgumentError if nothing is valid.
dataio::DepthImage fill_missing_depth(const dataio::DepthImage& depth);

// Median depth over the one-pixel image border.
PlaneModel estimate_background_plane(const dataio::DepthImage& depth);

// |z - z0| > tau, before smoothing.
Mask threshold_foreground(const dataio::DepthImage& depth, const PlaneModel& plane, Real tau);

// One pass of 3x3 majority voting; windows are clipped at the border and a
// pixel is set when strictly more than half of its window is set.
Mask majority_smooth(const Mask& mask);

Mask foreground_mask(const dataio::DepthImage& depth, const PlaneModel& plane, Real tau);

// Per-image min-max normalized depth replicated into three equal channels.
// A constant depth image maps to 0.5 everywhere.
dataio::ImageRGB depth_to_image(const dataio::DepthImage& depth);

// Model-ready view of one sample.
struct Prepared {
    dataio::ImageRGB rgb;
    dataio::ImageRGB depth;
    Mask foreground;
};

Prepared prepare(const dataio::SampleBundle& bundle, const PreprocessConfig& cfg = {});

}  // namespace dmad::preprocess
