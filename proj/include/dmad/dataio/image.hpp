#pragma once

#include "dmad/core/tensor.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dmad::dataio {

// Three-channel image with values in [0, 1], row-major, interleaved channels.
struct ImageRGB {
    int width = 0;
    int height = 0;
    std::vector<Real> data;

    ImageRGB() = default;
    ImageRGB(int w, int h, Real fill = 0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, fill) {}

    Real& at(int y, int x, int c) { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
    Real at(int y, int x, int c) const { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
};

struct DepthImage {
    int width = 0;
    int height = 0;
    std::vector<Real> z;
    std::vector<std::uint8_t> valid;

    DepthImage() = default;
    DepthImage(int w, int h, Real fill = 0)
        : width(w),
          height(h),
          z(static_cast<std::size_t>(w) * h, fill),
          valid(static_cast<std::size_t>(w) * h, 1) {}

    Real& at(int y, int x) { return z[static_cast<std::size_t>(y) * width + x]; }
    Real at(int y, int x) const { return z[static_cast<std::size_t>(y) * width + x]; }
    bool is_valid(int y, int x) const { return valid[static_cast<std::size_t>(y) * width + x] != 0; }
    std::size_t valid_count() const;
};

enum class Label { normal, anomalous };

struct SampleBundle {
    ImageRGB rgb;
    DepthImage depth;
    std::optional<Mask> gt_mask;
    Label label = Label::normal;
    std::string class_name;
    std::string sample_id;
};

// Throws ShapeError / FormatError when a type invariant does not hold.
void validate(const ImageRGB& img);
void validate(const DepthImage& depth);
void validate(const SampleBundle& bundle);

}  // namespace dmad::dataio
