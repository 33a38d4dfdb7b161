#include "dmad/discriminator/adam.hpp"

#include "dmad/core/error.hpp"

#include <cmath>

namespace dmad::discriminator {

void adam_update(Eigen::Ref<RowMatrix> param, const Eigen::Ref<const RowMatrix>& grad, Moments& mo, Real lr, long step,
                 const AdamSettings& s) {
    if (param.rows() != grad.rows() || param.cols() != grad.cols()) throw ShapeError("adam_update: shape mismatch");
    if (mo.m.size() == 0) {
        mo.m = RowMatrix::Zero(param.rows(), param.cols());
        mo.v = RowMatrix::Zero(param.rows(), param.cols());
    }
    mo.m = s.beta1 * mo.m + (1 - s.beta1) * grad;
    mo.v = s.beta2 * mo.v + (1 - s.beta2) * grad.cwiseAbs2();
    const Real c1 = 1 - std::pow(s.beta1, static_cast<Real>(step));
    const Real c2 = 1 - std::pow(s.beta2, static_cast<Real>(step));
    param.array() -= lr * (mo.m.array() / c1) / ((mo.v.array() / c2).sqrt() + s.eps);
}

}  // namespace dmad::discriminator
