#pragma once

#include "dmad/core/tensor.hpp"

namespace dmad::features {

// Pipeline stage a feature map belongs to: raw layer output, neighborhood
// aggregated, multiscale stacked, modality-concatenated, adaptor-fused.
enum class Stage { raw, aggregated, multiscale, concatenated, fused };

// Dense grid of per-patch feature vectors. `values` has one row per grid
// position (row-major over (h, w)) and one column per channel.
struct FeatureMap {
    int height = 0;
    int width = 0;
    Stage stage = Stage::raw;
    RowMatrix values;

    FeatureMap() = default;
    FeatureMap(int h, int w, int channels, Stage s) : height(h), width(w), stage(s), values(RowMatrix::Zero(h * w, channels)) {}

    int channels() const { return static_cast<int>(values.cols()); }
    int positions() const { return height * width; }
    auto at(int h, int w) { return values.row(h * width + w); }
    auto at(int h, int w) const { return values.row(h * width + w); }
};

}  // namespace dmad::features
