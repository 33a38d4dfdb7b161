#include "dmad/dataio/image.hpp"

#include "dmad/core/error.hpp"

#include <algorithm>
#include <cmath>

namespace dmad::dataio {

std::size_t DepthImage::valid_count() const {
    return static_cast<std::size_t>(std::count_if(valid.begin(), valid.end(), [](std::uint8_t v) { return v != 0; }));
}

void validate(const ImageRGB& img) {
    if (img.width <= 0 || img.height <= 0) throw ShapeError("rgb image has empty dimensions");
    if (img.data.size() != img.pixel_count() * 3) throw ShapeError("rgb data length does not match width*height*3");
    for (Real v : img.data) {
        if (!(v >= 0.0 && v <= 1.0)) throw FormatError("rgb channel value outside [0, 1]");
    }
}

void validate(const DepthImage& depth) {
    if (depth.width <= 0 || depth.height <= 0) throw ShapeError("depth image has empty dimensions");
    const auto n = static_cast<std::size_t>(depth.width) * depth.height;
    if (depth.z.size() != n || depth.valid.size() != n) throw ShapeError("depth buffers do not match width*height");
    for (std::size_t i = 0; i < n; ++i) {
        if (depth.valid[i] && !std::isfinite(depth.z[i])) throw FormatError("non-finite depth at a valid pixel");
    }
}

void validate(const SampleBundle& bundle) {
    validate(bundle.rgb);
    validate(bundle.depth);
    if (bundle.rgb.width != bundle.depth.width || bundle.rgb.height != bundle.depth.height) {
        throw ShapeError("rgb and depth dimensions differ");
    }
    if (bundle.gt_mask.has_value() != (bundle.label == Label::anomalous)) {
        throw FormatError("ground-truth mask must be present exactly for anomalous samples");
    }
    if (bundle.gt_mask) {
        if (bundle.gt_mask->width != bundle.rgb.width || bundle.gt_mask->height != bundle.rgb.height) {
            throw ShapeError("ground-truth mask dimensions differ from the image");
        }
    }
}

}  // namespace dmad::dataio
