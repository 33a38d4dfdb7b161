#pragma once

#include "dmad/discriminator/adam.hpp"
#include "dmad/discriminator/model.hpp"
#include "dmad/features/adaptor.hpp"
#include "dmad/features/backbone.hpp"
#include "dmad/preprocess/preprocess.hpp"

#include <cstdint>

namespace dmad::discriminator {

// Architecture shared by training and inference.
struct ModelConfig {
    features::BackboneConfig backbone;
    std::uint64_t backbone_seed = 0;
    int patch_size = 3;
    int fused_channels = 384;  // C_d; defaults to twice the multiscale width
    int hidden = 384;
    Real adaptor_init_noise = 0.01;
    preprocess::PreprocessConfig preprocess;
    Real sigma_smooth = 4.0;

    int concat_channels() const { return 2 * backbone.total_channels(); }
};

// Trainable parameters plus optimizer state.
struct ModelState {
    features::AdaptorParams adaptor;
    DiscriminatorParams disc;

    Moments adaptor_m;
    Moments w1_m, b1_m, gamma_m, shift_m, w2_m, b2_m;
    long step = 0;
};

ModelState init_model(const ModelConfig& cfg, std::uint64_t seed);

}  // namespace dmad::discriminator
