#pragma once

#include "dmad/core/tensor.hpp"

namespace dmad::discriminator {

struct AdamSettings {
    Real beta1 = 0.9;
    Real beta2 = 0.999;
    Real eps = 1e-8;
};

// First and second moments for one parameter tensor.
struct Moments {
    RowMatrix m;
    RowMatrix v;
};

// Bias-corrected adaptive-moment update of `param` in place. `step` is the
// 1-based update count. Moments are allocated on first use.
void adam_update(Eigen::Ref<RowMatrix> param, const Eigen::Ref<const RowMatrix>& grad, Moments& moments, Real lr,
                 long step, const AdamSettings& s);

}  // namespace dmad::discriminator
