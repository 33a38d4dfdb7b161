#include "dmad/anomaly/gaussian.hpp"

#include "dmad/core/error.hpp"

#include <algorithm>

namespace dmad::anomaly {

std::vector<Real> sample_gaussian_field(std::size_t n, Real sigma, Rng& rng) {
    if (!(sigma > 0)) throw ArgumentError("gaussian field needs sigma > 0");
    std::normal_distribution<Real> normal(0.0, sigma);
    std::vector<Real> out(n);
    for (auto& v : out) v = normal(rng);
    return out;
}

RowMatrix inject_stage_noise(const RowMatrix& x, Real sigma, Rng& rng) {
    const auto eps = sample_gaussian_field(static_cast<std::size_t>(x.size()), sigma, rng);
    RowMatrix out = x;
    for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] += eps[static_cast<std::size_t>(i)];
    return out;
}

dataio::ImageRGB inject_image_noise(const dataio::ImageRGB& x, Real sigma, Rng& rng) {
    const auto eps = sample_gaussian_field(x.data.size(), sigma, rng);
    dataio::ImageRGB out = x;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = std::clamp(out.data[i] + eps[i], Real{0}, Real{1});
    return out;
}

const char* to_string(ModalityChoice c) {
    switch (c) {
        case ModalityChoice::both: return "both";
        case ModalityChoice::rgb_only: return "rgb_only";
        case ModalityChoice::depth_only: return "depth_only";
    }
    return "unknown";
}

ModalityChoice draw_modality(Real alpha, Rng& rng) {
    if (!(alpha >= 0 && alpha <= 0.5)) throw ArgumentError("selective-modality alpha must lie in [0, 1/2]");
    Real p = 0;
    while (p == 0) p = uniform01(rng);  // open interval
    if (p > 2 * alpha) return ModalityChoice::both;
    if (p > alpha) return ModalityChoice::rgb_only;
    return ModalityChoice::depth_only;
}

}  // namespace dmad::anomaly
