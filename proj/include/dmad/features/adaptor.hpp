#pragma once

#include "dmad/core/tensor.hpp"
#include "dmad/features/feature_map.hpp"

#include <cstdint>

namespace dmad::features {

// Bias-free linear fusion layer, d = o * weight.
struct AdaptorParams {
    RowMatrix weight;  // C_o x C_d

    int in_channels() const { return static_cast<int>(weight.rows()); }
    int out_channels() const { return static_cast<int>(weight.cols()); }
};

// Identity on the leading min(C_o, C_d) diagonal plus normal(0, noise_std^2).
AdaptorParams make_adaptor(int in_channels, int out_channels, std::uint64_t seed, Real noise_std = 0.01);

// Channel concatenation of the two modality maps (rgb first).
FeatureMap concat_modalities(const FeatureMap& s_rgb, const FeatureMap& s_depth);

FeatureMap apply_adaptor(const FeatureMap& o, const AdaptorParams& a);

FeatureMap fuse(const FeatureMap& s_rgb, const FeatureMap& s_depth, const AdaptorParams& a);

struct AdaptorGrads {
    RowMatrix weight;  // dL/dW, summed over positions (and stacked batch rows)
    RowMatrix input;   // dL/do
};

// grad_d and o are row-stacked positions (any number of maps).
AdaptorGrads adaptor_backward(const RowMatrix& grad_d, const RowMatrix& o, const AdaptorParams& a);

}  // namespace dmad::features
