#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace dmad::dataio {

// Raw decoded PNG. `samples` holds channels*width*height values, 8- or
// 16-bit depending on `bit_depth`.
struct PngData {
    int width = 0;
    int height = 0;
    int channels = 0;   // 1 = gray, 3 = rgb
    int bit_depth = 8;  // 8 or 16
    std::vector<std::uint16_t> samples;
};

// Reads any PNG and normalizes it to gray or rgb without alpha, keeping
// 16-bit samples when the file has them.
PngData read_png(const std::filesystem::path& path);

void write_png(const std::filesystem::path& path, const PngData& png);

}  // namespace dmad::dataio
