#include "dmad/dataio/heatmap.hpp"

#include "dmad/core/error.hpp"
#include "dmad/dataio/png_io.hpp"

#include <algorithm>
#include <cmath>

namespace dmad::dataio {

namespace {

std::array<Rgb8, 256> build_colormap() {
    constexpr std::array<int, 4> pos{0, 85, 170, 255};
    constexpr std::array<std::array<int, 3>, 4> anchor{{{0, 0, 128}, {0, 255, 255}, {255, 255, 0}, {128, 0, 0}}};
    std::array<Rgb8, 256> table{};
    for (int i = 0; i < 256; ++i) {
        std::size_t seg = 0;
        while (seg + 2 < pos.size() && i > pos[seg + 1]) ++seg;
        const double t = static_cast<double>(i - pos[seg]) / (pos[seg + 1] - pos[seg]);
        for (std::size_t c = 0; c < 3; ++c) {
            const double v = anchor[seg][c] + t * (anchor[seg + 1][c] - anchor[seg][c]);
            table[static_cast<std::size_t>(i)][c] = static_cast<std::uint8_t>(std::lround(v));
        }
    }
    return table;
}

}  // namespace

const std::array<Rgb8, 256>& colormap() {
    static const std::array<Rgb8, 256> table = build_colormap();
    return table;
}

void save_heatmap(const Field& scores, const std::filesystem::path& path) {
    if (scores.values.empty()) throw ShapeError("save_heatmap: empty score map");
    for (Real v : scores.values) {
        if (!std::isfinite(v)) throw ArgumentError("save_heatmap: non-finite score");
    }
    const auto [lo_it, hi_it] = std::minmax_element(scores.values.begin(), scores.values.end());
    const Real lo = *lo_it, hi = *hi_it;
    const auto& cmap = colormap();

    PngData png{scores.width, scores.height, 3, 8, {}};
    png.samples.reserve(scores.values.size() * 3);
    for (Real v : scores.values) {
        const long idx = hi > lo ? std::lround((v - lo) / (hi - lo) * 255.0) : 0;
        for (std::uint8_t c : cmap[static_cast<std::size_t>(std::clamp(idx, 0L, 255L))]) png.samples.push_back(c);
    }
    write_png(path, png);
}

}  // namespace dmad::dataio
