#pragma once

#include "dmad/core/tensor.hpp"

#include <array>
#include <cstdint>
#include <filesystem>

namespace dmad::dataio {

using Rgb8 = std::array<std::uint8_t, 3>;

// 256-entry colormap: linear interpolation of (0,0,128) -> (0,255,255) ->
// (255,255,0) -> (128,0,0) anchored at indices 0, 85, 170, 255.
const std::array<Rgb8, 256>& colormap();

// Min-max normalizes the scores per image and writes an 8-bit RGB PNG.
// A constant map renders entirely with colormap entry 0.
void save_heatmap(const Field& scores, const std::filesystem::path& path);

}  // namespace dmad::dataio
