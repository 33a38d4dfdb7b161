#include "dmad/discriminator/losses.hpp"

#include "dmad/core/error.hpp"

#include <cmath>

namespace dmad::discriminator {

namespace {

struct Clamped {
    Real value;
    bool clamped;
};

Clamped clamp_prob(Real u) {
    if (u < kProbClamp) return {kProbClamp, true};
    if (u > 1 - kProbClamp) return {1 - kProbClamp, true};
    return {u, false};
}

}  // namespace

LossValue bce_loss(const Vector& u, int target) {
    if (target != 0 && target != 1) throw ArgumentError("bce target must be 0 or 1");
    if (u.size() == 0) throw ArgumentError("bce_loss on an empty map");
    const auto n = static_cast<Real>(u.size());
    LossValue out{0, Vector::Zero(u.size())};
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        const auto [p, clamped] = clamp_prob(u[i]);
        if (target == 1) {
            out.value -= std::log(p);
            if (!clamped) out.grad[i] = -1.0 / (p * n);
        } else {
            out.value -= std::log(1 - p);
            if (!clamped) out.grad[i] = 1.0 / ((1 - p) * n);
        }
    }
    out.value /= n;
    return out;
}

LossValue focal_loss(const Vector& u, const std::vector<std::uint8_t>& targets, Real gamma, Real alpha) {
    if (static_cast<std::size_t>(u.size()) != targets.size()) throw ShapeError("focal_loss: target length mismatch");
    if (u.size() == 0) throw ArgumentError("focal_loss on an empty map");
    if (gamma < 0) throw ArgumentError("focal gamma must be non-negative");
    const auto n = static_cast<Real>(u.size());
    LossValue out{0, Vector::Zero(u.size())};
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        const auto [q, clamped] = clamp_prob(u[i]);
        const bool pos = targets[static_cast<std::size_t>(i)] != 0;
        const Real pt = pos ? q : 1 - q;
        const Real at = pos ? alpha : 1 - alpha;
        const Real one_minus = 1 - pt;
        const Real log_pt = std::log(pt);
        out.value -= at * std::pow(one_minus, gamma) * log_pt;
        if (!clamped) {
            // d/dpt of -at (1-pt)^g log pt
            const Real pow_g1 = gamma == 0 ? 0 : gamma * std::pow(one_minus, gamma - 1);
            const Real d_pt = at * (pow_g1 * log_pt - std::pow(one_minus, gamma) / pt);
            out.grad[i] = (pos ? d_pt : -d_pt) / n;
        }
    }
    out.value /= n;
    return out;
}

}  // namespace dmad::discriminator
