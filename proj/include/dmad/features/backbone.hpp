#pragma once

#include "dmad/core/tensor.hpp"
#include "dmad/dataio/image.hpp"
#include "dmad/features/feature_map.hpp"

#include <cstdint>
#include <vector>

namespace dmad::features {

struct LayerConfig {
    int layer = 2;
    int stride = 4;  // patch extent equals the stride
    int channels = 64;
};

struct BackboneConfig {
    std::vector<LayerConfig> layers{{2, 4, 64}, {3, 8, 128}};
    Real slope = 0.1;

    static BackboneConfig desk_scale() { return {}; }
    // Channel split of a WideResNet50 layer2/layer3 stack (512 + 1024).
    static BackboneConfig full_scale() { return {{{2, 4, 512}, {3, 8, 1024}}, 0.1}; }

    int total_channels() const;
};

struct LayerParams {
    LayerConfig config;
    RowMatrix weight;  // (stride*stride*3) x channels
    RowVector bias;    // 1 x channels
};

// Frozen multiscale patch-embedding extractor. Each layer projects
// non-overlapping stride x stride patches through a fixed affine map and a
// leaky rectifier. All parameters are drawn from normal(0, 1/fan_in) under
// `seed`; the same instance serves both modalities.
class FrozenBackbone {
public:
    FrozenBackbone(std::uint64_t seed, BackboneConfig config = {});

    std::uint64_t seed() const { return seed_; }
    const BackboneConfig& config() const { return config_; }
    const std::vector<LayerParams>& layers() const { return layers_; }
    const LayerParams& layer(int j) const;

    // Byte-level fingerprint of all parameters (FNV-1a over the raw doubles).
    std::uint64_t fingerprint() const;

private:
    std::uint64_t seed_;
    BackboneConfig config_;
    std::vector<LayerParams> layers_;
};

// Raw layer-j features, (H/stride) x (W/stride) x C_j.
FeatureMap extract_layer_features(const dataio::ImageRGB& img, const FrozenBackbone& bb, int layer);

// Window mean over the (p x p) neighborhood of each position; positions
// outside the grid are excluded from the mean. p must be odd.
FeatureMap aggregate_neighborhood(const FeatureMap& v, int patch_size);

// Nearest-neighbor resize (source index = floor(dst * src / dst_size)).
FeatureMap resize_nearest(const FeatureMap& map, int height, int width);

// Aggregated layer maps resized to the shallowest grid and channel-stacked
// in layer order.
FeatureMap build_multiscale(const dataio::ImageRGB& img, const FrozenBackbone& bb, int patch_size);

}  // namespace dmad::features
