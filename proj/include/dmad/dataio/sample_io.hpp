#pragma once

#include "dmad/dataio/image.hpp"

#include <filesystem>

namespace dmad::dataio {

// Sidecar describing how depth.png maps back to scene units. Valid pixels
// store 1 + round((z - depth_min) / (depth_max - depth_min) * 65534);
// invalid pixels store invalid_code (always 0).
struct DepthSidecar {
    double depth_min = 0.0;
    double depth_max = 0.0;
    int invalid_code = 0;
};

// Writes rgb.png, depth.png, depth.json and, for anomalous samples, gt.png
// into `dir` (created if missing).
void save_sample(const SampleBundle& bundle, const std::filesystem::path& dir);

// Inverse of save_sample. class_name is taken from the grandparent directory
// (<class>/<split>/<id>) and sample_id from the directory name.
SampleBundle load_sample(const std::filesystem::path& dir);

}  // namespace dmad::dataio
