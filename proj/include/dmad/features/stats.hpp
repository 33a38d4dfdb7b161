#pragma once

#include "dmad/core/tensor.hpp"
#include "dmad/features/feature_map.hpp"

#include <filesystem>
#include <vector>

namespace dmad::features {

// Population standard deviation of each channel over every position of
// every map.
std::vector<Real> channel_stddev(const std::vector<FeatureMap>& maps);

// CSV with header `channel,std` and one row per channel.
void emit_feature_stats(const std::vector<FeatureMap>& maps, const std::filesystem::path& out_path);

}  // namespace dmad::features
