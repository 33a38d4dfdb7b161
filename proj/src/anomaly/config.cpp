#include "dmad/anomaly/config.hpp"

#include "dmad/core/error.hpp"

#include <iostream>

namespace dmad::anomaly {

const char* to_string(TextureFamily f) {
    switch (f) {
        case TextureFamily::grating: return "grating";
        case TextureFamily::checkerboard: return "checkerboard";
        case TextureFamily::value_noise: return "value_noise";
        case TextureFamily::cellular: return "cellular";
    }
    return "unknown";
}

TextureFamily texture_family_from_string(const std::string& s) {
    if (s == "grating") return TextureFamily::grating;
    if (s == "checkerboard") return TextureFamily::checkerboard;
    if (s == "value_noise") return TextureFamily::value_noise;
    if (s == "cellular") return TextureFamily::cellular;
    throw ArgumentError("unknown texture family '" + s + "'");
}

bool NoiseConfig::validate() const {
    if (!(alpha >= 0 && alpha <= 0.5)) throw ArgumentError("selective-modality alpha must lie in [0, 1/2]");
    std::vector<Real> active;
    for (int k = 0; k < 3; ++k) {
        if (!stages[static_cast<std::size_t>(k)]) continue;
        if (!(sigma(k) > 0)) throw ArgumentError("enabled noise stage needs sigma > 0");
        active.push_back(sigma(k));
    }
    for (std::size_t i = 1; i < active.size(); ++i) {
        if (!(active[i - 1] > active[i])) {
            std::cerr << "warning: noise scales are not strictly decreasing across stages\n";
            return false;
        }
    }
    return true;
}

void TextureConfig::validate() const {
    if (!(beta_lo > 0 && beta_hi < 1 && beta_lo < beta_hi)) throw ArgumentError("beta range must lie inside (0, 1)");
    if (!(beta_mean > beta_lo && beta_mean < beta_hi)) throw ArgumentError("beta mean must lie inside the beta range");
    if (!(beta_std > 0)) throw ArgumentError("beta std must be positive");
    if (!(threshold > 0 && threshold < 1)) throw ArgumentError("perlin threshold must lie in (0, 1)");
    if (max_resolution_exp < 0 || max_resolution_exp > 5) throw ArgumentError("perlin resolution exponent must be 0..5");
    if (!(alpha >= 0 && alpha <= 0.5)) throw ArgumentError("selective-modality alpha must lie in [0, 1/2]");
    if (bank.empty()) throw ArgumentError("texture bank is empty");
}

}  // namespace dmad::anomaly
