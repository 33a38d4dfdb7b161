#include "dmad/discriminator/state.hpp"

#include "dmad/core/rng.hpp"

namespace dmad::discriminator {

ModelState init_model(const ModelConfig& cfg, std::uint64_t seed) {
    ModelState s;
    s.adaptor = features::make_adaptor(cfg.concat_channels(), cfg.fused_channels, derive_seed(seed, {101}),
                                       cfg.adaptor_init_noise);
    s.disc = make_discriminator(cfg.fused_channels, cfg.hidden, derive_seed(seed, {102}));
    return s;
}

}  // namespace dmad::discriminator
