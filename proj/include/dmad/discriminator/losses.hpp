#pragma once

#include "dmad/core/tensor.hpp"

#include <cstdint>
#include <vector>

namespace dmad::discriminator {

inline constexpr Real kProbClamp = 1e-7;

struct LossValue {
    Real value = 0;
    Vector grad;  // dL/du, zero where the probability was clamped
};

// Mean binary cross-entropy of every element against a constant target.
LossValue bce_loss(const Vector& u, int target);

// Mean focal loss -a_t (1-p_t)^gamma log p_t with per-element binary targets.
LossValue focal_loss(const Vector& u, const std::vector<std::uint8_t>& targets, Real gamma = 2.0, Real alpha = 0.75);

struct LossBreakdown {
    Real l_bce_n = 0;
    Real l_bce_g = 0;
    Real l_focal_t = 0;
    Real total = 0;
};

}  // namespace dmad::discriminator
