#include "dmad/anomaly/generators.hpp"

#include "dmad/anomaly/texture.hpp"

namespace dmad::anomaly {

using features::FeatureMap;

TextureAnomalySample make_utag_sample(const preprocess::Prepared& sample, const TextureConfig& cfg, Rng& rng) {
    const int h = sample.rgb.height, w = sample.rgb.width;
    TextureAnomalySample out;
    PerlinMask pm = perlin_mask(h, w, sample.foreground, cfg, rng);
    out.m_t = std::move(pm.mask);
    out.mask_empty = pm.empty;
    out.beta = sample_beta(cfg, rng);
    out.family = cfg.bank[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(cfg.bank.size()) - 1))];

    const dataio::ImageRGB patch = texture_patch(h, w, out.family, false, rng);
    ModalityPair<dataio::ImageRGB> anomalous{blend_texture(sample.rgb, patch, out.m_t, out.beta),
                                             blend_texture(sample.depth, to_grayscale(patch), out.m_t, out.beta)};
    auto sel = select_modality(std::move(anomalous), ModalityPair<dataio::ImageRGB>{sample.rgb, sample.depth}, cfg.alpha, rng);
    out.x_plus_rgb = std::move(sel.pair.rgb);
    out.x_plus_depth = std::move(sel.pair.depth);
    out.choice = sel.choice;
    return out;
}

ModalityPair<FeatureMap> clean_multiscale(const preprocess::Prepared& sample, const features::FrozenBackbone& bb,
                                          int patch_size) {
    return {features::build_multiscale(sample.rgb, bb, patch_size), features::build_multiscale(sample.depth, bb, patch_size)};
}

GaussianAnomalySample make_mgag_sample(const preprocess::Prepared& sample, const ModalityPair<FeatureMap>& clean,
                                       const features::FrozenBackbone& bb, int patch_size,
                                       const features::AdaptorParams& adaptor, const NoiseConfig& cfg, Rng& rng,
                                       bool compute_fused) {
    GaussianAnomalySample out;
    if (cfg.stages[0]) {
        ModalityPair<dataio::ImageRGB> noisy{inject_image_noise(sample.rgb, cfg.sigma1, rng),
                                             inject_image_noise(sample.depth, cfg.sigma1, rng)};
        auto sel = select_modality(std::move(noisy), ModalityPair<dataio::ImageRGB>{sample.rgb, sample.depth}, cfg.alpha, rng);
        out.g1_choice = sel.choice;
        // Only the modality that actually changed needs a new forward pass.
        FeatureMap s_rgb = sel.choice == ModalityChoice::depth_only ? clean.rgb
                                                                    : features::build_multiscale(sel.pair.rgb, bb, patch_size);
        FeatureMap s_depth = sel.choice == ModalityChoice::rgb_only
                                 ? clean.depth
                                 : features::build_multiscale(sel.pair.depth, bb, patch_size);
        out.o_g1 = features::concat_modalities(s_rgb, s_depth);
        if (compute_fused) out.d_g1 = features::apply_adaptor(*out.o_g1, adaptor);
        out.x_minus = std::move(sel.pair);
    }
    if (cfg.stages[1]) {
        ModalityPair<FeatureMap> noisy{clean.rgb, clean.depth};
        noisy.rgb.values = inject_stage_noise(clean.rgb.values, cfg.sigma2, rng);
        noisy.depth.values = inject_stage_noise(clean.depth.values, cfg.sigma2, rng);
        auto sel = select_modality(std::move(noisy), ModalityPair<FeatureMap>{clean.rgb, clean.depth}, cfg.alpha, rng);
        out.g2_choice = sel.choice;
        out.o_g2 = features::concat_modalities(sel.pair.rgb, sel.pair.depth);
        if (compute_fused) out.d_g2 = features::apply_adaptor(*out.o_g2, adaptor);
        out.s_minus = std::move(sel.pair);
    }
    if (cfg.stages[2]) {
        const int rows = clean.rgb.positions();
        const int cols = adaptor.out_channels();
        const auto eps = sample_gaussian_field(static_cast<std::size_t>(rows) * cols, cfg.sigma3, rng);
        out.eps_d = Eigen::Map<const RowMatrix>(eps.data(), rows, cols);
        out.g3_choice = ModalityChoice::both;
        if (compute_fused) {
            FeatureMap d3 = features::fuse(clean.rgb, clean.depth, adaptor);
            d3.values += *out.eps_d;
            out.d_g3 = std::move(d3);
        }
    }
    return out;
}

}  // namespace dmad::anomaly
