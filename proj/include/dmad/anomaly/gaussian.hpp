#pragma once

#include "dmad/core/rng.hpp"
#include "dmad/core/tensor.hpp"
#include "dmad/dataio/image.hpp"

#include <utility>
#include <vector>

namespace dmad::anomaly {

// n i.i.d. normal(0, sigma^2) draws. Throws ArgumentError for sigma <= 0.
std::vector<Real> sample_gaussian_field(std::size_t n, Real sigma, Rng& rng);

// x + eps with a fresh field of matching shape.
RowMatrix inject_stage_noise(const RowMatrix& x, Real sigma, Rng& rng);

// Image-stage variant; the result is clamped back into [0, 1].
dataio::ImageRGB inject_image_noise(const dataio::ImageRGB& x, Real sigma, Rng& rng);

enum class ModalityChoice { both, rgb_only, depth_only };

const char* to_string(ModalityChoice c);

// Draws p ~ U(0, 1): both if p > 2a, rgb_only if 2a >= p > a, depth_only
// if a >= p.
ModalityChoice draw_modality(Real alpha, Rng& rng);

template <typename T>
struct ModalityPair {
    T rgb;
    T depth;
};

template <typename T>
struct Selected {
    ModalityPair<T> pair;
    ModalityChoice choice;
};

// Pairs the anomalous and clean variants according to draw_modality.
template <typename T>
Selected<T> select_modality(ModalityPair<T> anomalous, ModalityPair<T> clean, Real alpha, Rng& rng) {
    const ModalityChoice c = draw_modality(alpha, rng);
    switch (c) {
        case ModalityChoice::both: return {{std::move(anomalous.rgb), std::move(anomalous.depth)}, c};
        case ModalityChoice::rgb_only: return {{std::move(anomalous.rgb), std::move(clean.depth)}, c};
        case ModalityChoice::depth_only: return {{std::move(clean.rgb), std::move(anomalous.depth)}, c};
    }
    return {{std::move(anomalous.rgb), std::move(anomalous.depth)}, c};
}

}  // namespace dmad::anomaly
