#pragma once

#include "dmad/core/tensor.hpp"

#include <array>
#include <string>
#include <vector>

namespace dmad::anomaly {

enum class TextureFamily { grating, checkerboard, value_noise, cellular };

const char* to_string(TextureFamily f);
TextureFamily texture_family_from_string(const std::string& s);

// Multi-scale Gaussian anomaly settings. Stage k perturbs, in order, the
// input images, the multiscale maps before the adaptor, and the fused map.
struct NoiseConfig {
    Real sigma1 = 0.12;
    Real sigma2 = 0.06;
    Real sigma3 = 0.02;
    Real alpha = 1.0 / 3.0;
    std::array<bool, 3> stages{true, true, true};

    // (0.12, 0.06, 0.02): the scales used for the main results.
    static NoiseConfig standard() { return {}; }
    // (0.12, 0.04, 0.02): best row of the noise-scale ablation.
    static NoiseConfig ablation_best() { return {0.12, 0.04, 0.02, 1.0 / 3.0, {true, true, true}}; }

    Real sigma(int stage) const { return stage == 0 ? sigma1 : stage == 1 ? sigma2 : sigma3; }
    int enabled_stages() const { return int(stages[0]) + int(stages[1]) + int(stages[2]); }

    // Throws on alpha outside [0, 1/2] or a nonpositive sigma on an enabled
    // stage. Returns false (after printing a warning) when the enabled
    // sigmas are not strictly decreasing, which ablation runs allow.
    bool validate() const;
};

struct TextureConfig {
    Real beta_mean = 0.5;
    Real beta_std = 0.3;
    Real beta_lo = 0.2;
    Real beta_hi = 0.8;
    Real threshold = 0.5;
    int max_resolution_exp = 5;  // lattice resolutions 2^0 .. 2^5
    int max_mask_retries = 5;
    Real alpha = 1.0 / 3.0;
    std::vector<TextureFamily> bank{TextureFamily::grating, TextureFamily::checkerboard, TextureFamily::value_noise,
                                    TextureFamily::cellular};

    void validate() const;
};

// Which generators and selection rule a training run uses.
struct GeneratorMix {
    bool use_mgag = true;
    bool use_utag = true;
};

}  // namespace dmad::anomaly
