#pragma once

#include "dmad/core/tensor.hpp"
#include "dmad/dataio/image.hpp"
#include "dmad/discriminator/checkpoint.hpp"
#include "dmad/features/backbone.hpp"

#include <filesystem>
#include <string>

namespace dmad::inference {

struct ScoreMap {
    Field pixel_scores;
    Real image_score = 0;  // max over pixel_scores
};

// Align-corners-false bilinear interpolation; source coordinates are
// clamped to the grid. Throws ArgumentError when the target is smaller.
Field bilinear_upsample(const Field& map, int height, int width);

// Normalized Gaussian kernel of radius ceil(3 sigma). sigma = 0 gives {1}.
std::vector<Real> gaussian_kernel(Real sigma);

// Separable smoothing with reflect-101 padding (edge pixel not repeated).
// sigma = 0 returns the input unchanged; negative sigma throws.
Field gaussian_smooth(const Field& map, Real sigma);

// Upsample + smooth a discriminator grid and take the max.
ScoreMap score_from_grid(const Field& grid, int height, int width, Real sigma_smooth);

// Eval-mode discriminator map on the feature grid of a clean sample.
Field predict_grid(const dataio::SampleBundle& bundle, const discriminator::Checkpoint& model,
                   const features::FrozenBackbone& bb);

ScoreMap score_sample(const dataio::SampleBundle& bundle, const discriminator::Checkpoint& model,
                      const features::FrozenBackbone& bb);

// Writes <stem>.json {sample_id, image_score, map_path} and <stem>.f32,
// a u32 height, u32 width header followed by float32 scores, little-endian.
void write_score(const ScoreMap& s, const std::string& sample_id, const std::filesystem::path& stem);

// Reads a .f32 map written by write_score.
Field read_score_map(const std::filesystem::path& path);

}  // namespace dmad::inference
