#pragma once

#include "dmad/anomaly/config.hpp"
#include "dmad/anomaly/gaussian.hpp"
#include "dmad/core/rng.hpp"
#include "dmad/features/adaptor.hpp"
#include "dmad/features/backbone.hpp"
#include "dmad/preprocess/preprocess.hpp"

#include <optional>

namespace dmad::anomaly {

struct TextureAnomalySample {
    dataio::ImageRGB x_plus_rgb;
    dataio::ImageRGB x_plus_depth;
    Mask m_t;            // shared supervision mask, subset of the foreground
    Real beta = 0;
    ModalityChoice choice = ModalityChoice::both;
    TextureFamily family = TextureFamily::grating;
    bool mask_empty = false;
};

// One Perlin mask and one beta shared by both modalities; RGB takes a colour
// patch, the depth image its grayscale version; then selective modality.
TextureAnomalySample make_utag_sample(const preprocess::Prepared& sample, const TextureConfig& cfg, Rng& rng);

// Gaussian anomalies at the three stages. Disabled stages are left empty.
struct GaussianAnomalySample {
    // Stage 1: noisy images (after modality selection) and the concatenated
    // multiscale maps they produce.
    std::optional<ModalityPair<dataio::ImageRGB>> x_minus;
    ModalityChoice g1_choice = ModalityChoice::both;
    std::optional<features::FeatureMap> o_g1;

    // Stage 2: noisy multiscale maps (after modality selection).
    std::optional<ModalityPair<features::FeatureMap>> s_minus;
    ModalityChoice g2_choice = ModalityChoice::both;
    std::optional<features::FeatureMap> o_g2;

    // Stage 3: noise added to the fused map; never modality-selected.
    std::optional<RowMatrix> eps_d;
    ModalityChoice g3_choice = ModalityChoice::both;

    // Fused maps of the three pathways under the adaptor passed in.
    std::optional<features::FeatureMap> d_g1, d_g2, d_g3;
};

// Clean multiscale maps for both modalities of a prepared sample.
ModalityPair<features::FeatureMap> clean_multiscale(const preprocess::Prepared& sample,
                                                    const features::FrozenBackbone& bb, int patch_size);

// With compute_fused = false the fused maps d_g1..d_g3 are left empty; the
// trainer only needs the adaptor inputs and eps_d.
GaussianAnomalySample make_mgag_sample(const preprocess::Prepared& sample, const ModalityPair<features::FeatureMap>& clean,
                                       const features::FrozenBackbone& bb, int patch_size,
                                       const features::AdaptorParams& adaptor, const NoiseConfig& cfg, Rng& rng,
                                       bool compute_fused = true);

}  // namespace dmad::anomaly
