#include "dmad/preprocess/preprocess.hpp"

#include "dmad/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dmad::preprocess {

using dataio::DepthImage;
using dataio::ImageRGB;

DepthImage fill_missing_depth(const DepthImage& depth) {
    dataio::validate(depth);
    if (depth.valid_count() == 0) throw ArgumentError("fill_missing_depth: no valid pixels");

    const int w = depth.width, h = depth.height;
    DepthImage out = depth;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (depth.is_valid(y, x)) continue;
            // Ring search: a hit at Chebyshev radius r may be beaten by a
            // pixel on a later ring only while that ring is closer than the
            // best Euclidean distance found so far.
            long best_d2 = std::numeric_limits<long>::max();
            long best_idx = -1;
            const int max_r = std::max(w, h);
            for (int r = 1; r <= max_r; ++r) {
                if (best_idx >= 0 && static_cast<long>(r) * r > best_d2) break;
                const int y0 = y - r, y1 = y + r, x0 = x - r, x1 = x + r;
                for (int yy = std::max(0, y0); yy <= std::min(h - 1, y1); ++yy) {
                    const bool edge_row = yy == y0 || yy == y1;
                    for (int xx = std::max(0, x0); xx <= std::min(w - 1, x1); ++xx) {
                        if (!edge_row && xx != x0 && xx != x1) continue;
                        if (!depth.is_valid(yy, xx)) continue;
                        const long dy = yy - y, dx = xx - x;
                        const long d2 = dy * dy + dx * dx;
                        const long idx = static_cast<long>(yy) * w + xx;
                        if (d2 < best_d2 || (d2 == best_d2 && idx < best_idx)) {
                            best_d2 = d2;
                            best_idx = idx;
                        }
                    }
                }
            }
            const auto i = static_cast<std::size_t>(y) * w + x;
            out.z[i] = depth.z[static_cast<std::size_t>(best_idx)];
            out.valid[i] = 1;
        }
    }
    return out;
}

PlaneModel estimate_background_plane(const DepthImage& depth) {
    dataio::validate(depth);
    std::vector<Real> border;
    const int w = depth.width, h = depth.height;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if ((y == 0 || y == h - 1 || x == 0 || x == w - 1) && depth.is_valid(y, x)) border.push_back(depth.at(y, x));
        }
    }
    if (border.empty()) throw ArgumentError("estimate_background_plane: border has no valid depth");
    const std::size_t mid = border.size() / 2;
    std::nth_element(border.begin(), border.begin() + static_cast<long>(mid), border.end());
    Real median = border[mid];
    if (border.size() % 2 == 0) {
        const Real lower = *std::max_element(border.begin(), border.begin() + static_cast<long>(mid));
        median = 0.5 * (median + lower);
    }
    return PlaneModel{median};
}

Mask threshold_foreground(const DepthImage& depth, const PlaneModel& plane, Real tau) {
    if (!(tau >= 0)) throw ArgumentError("foreground threshold must be non-negative");
    Mask m(depth.width, depth.height);
    for (std::size_t i = 0; i < depth.z.size(); ++i) m.bits[i] = std::abs(depth.z[i] - plane.z0) > tau;
    return m;
}

Mask majority_smooth(const Mask& mask) {
    Mask out(mask.width, mask.height);
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            int set = 0, total = 0;
            for (int yy = std::max(0, y - 1); yy <= std::min(mask.height - 1, y + 1); ++yy) {
                for (int xx = std::max(0, x - 1); xx <= std::min(mask.width - 1, x + 1); ++xx) {
                    set += mask.at(yy, xx);
                    ++total;
                }
            }
            out.at(y, x) = 2 * set > total;
        }
    }
    return out;
}

Mask foreground_mask(const DepthImage& depth, const PlaneModel& plane, Real tau) {
    return majority_smooth(threshold_foreground(depth, plane, tau));
}

ImageRGB depth_to_image(const DepthImage& depth) {
    dataio::validate(depth);
    const auto [lo_it, hi_it] = std::minmax_element(depth.z.begin(), depth.z.end());
    const Real lo = *lo_it, hi = *hi_it;
    ImageRGB out(depth.width, depth.height);
    for (std::size_t i = 0; i < depth.z.size(); ++i) {
        const Real v = hi > lo ? (depth.z[i] - lo) / (hi - lo) : Real{0.5};
        out.data[3 * i] = out.data[3 * i + 1] = out.data[3 * i + 2] = v;
    }
    return out;
}

Prepared prepare(const dataio::SampleBundle& bundle, const PreprocessConfig& cfg) {
    if (bundle.rgb.width != bundle.depth.width || bundle.rgb.height != bundle.depth.height) {
        throw ShapeError("rgb and depth dimensions differ");
    }
    const DepthImage filled = fill_missing_depth(bundle.depth);
    const PlaneModel plane = estimate_background_plane(filled);
    return Prepared{bundle.rgb, depth_to_image(filled), foreground_mask(filled, plane, cfg.tau)};
}

}  // namespace dmad::preprocess
