#include "dmad/discriminator/model.hpp"

#include "dmad/core/error.hpp"
#include "dmad/core/rng.hpp"

#include <cmath>

namespace dmad::discriminator {

DiscriminatorParams make_discriminator(int in_channels, int hidden, std::uint64_t seed) {
    if (in_channels <= 0 || hidden <= 0) throw ArgumentError("discriminator dimensions must be positive");
    Rng rng(seed);
    DiscriminatorParams p;
    std::normal_distribution<Real> n1(0.0, std::sqrt(2.0 / (in_channels + hidden)));
    p.w1 = RowMatrix(in_channels, hidden);
    for (Eigen::Index i = 0; i < p.w1.size(); ++i) p.w1.data()[i] = n1(rng);
    p.b1 = RowVector::Zero(hidden);
    p.gamma = RowVector::Ones(hidden);
    p.shift = RowVector::Zero(hidden);
    p.running_mean = RowVector::Zero(hidden);
    p.running_var = RowVector::Ones(hidden);
    std::normal_distribution<Real> n2(0.0, std::sqrt(2.0 / (hidden + 1)));
    p.w2 = Vector(hidden);
    for (Eigen::Index i = 0; i < p.w2.size(); ++i) p.w2[i] = n2(rng);
    p.b2 = 0;
    return p;
}

Vector disc_forward(const RowMatrix& x, const DiscriminatorParams& p, Mode mode, ForwardCache* cache) {
    if (x.cols() != p.in_channels()) {
        throw ShapeError("discriminator expects " + std::to_string(p.in_channels()) + " channels, got " +
                         std::to_string(x.cols()));
    }
    if (x.rows() == 0) throw ShapeError("discriminator input has no rows");
    Vector u = disc_forward_preact(x * p.w1, p, mode, cache);
    if (cache) cache->input = x;
    return u;
}

Vector disc_forward_preact(RowMatrix z, const DiscriminatorParams& p, Mode mode, ForwardCache* cache) {
    if (z.cols() != p.hidden()) throw ShapeError("pre-activation width does not match the discriminator");
    if (z.rows() == 0) throw ShapeError("discriminator input has no rows");
    const Eigen::Index n = z.rows(), h = z.cols();
    z.rowwise() += p.b1;

    RowVector mean, var;
    if (mode == Mode::train) {
        mean = z.colwise().mean();
        var = RowVector::Zero(h);
        for (Eigen::Index r = 0; r < n; ++r) var.array() += (z.row(r) - mean).array().square();
        var /= static_cast<Real>(n);
    } else {
        mean = p.running_mean;
        var = p.running_var;
    }
    const RowVector inv_std = (var.array() + p.bn_eps).rsqrt().matrix();

    // z becomes xhat in place; the rest of the head is recomputed on demand.
    using Row = Eigen::Array<Real, 1, Eigen::Dynamic>;
    const Row mean_a = mean.array(), inv_a = inv_std.array();
    const Row gamma = p.gamma.array(), shift = p.shift.array(), w2 = p.w2.transpose().array();
    Vector u(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        auto xh = z.row(r).array();
        xh = (xh - mean_a) * inv_a;
        const Row b = xh * gamma + shift;
        const Real logit = (b.max(p.slope * b) * w2).sum() + p.b2;
        u[r] = 1.0 / (1.0 + std::exp(-logit));
    }

    if (cache) {
        cache->input.resize(0, 0);
        cache->xhat = std::move(z);
        cache->batch_mean = mean;
        cache->batch_var = var;
        cache->inv_std = inv_std;
        cache->u = u;
    }
    return u;
}

DiscriminatorGrads disc_backward_head(const Vector& grad_u, const ForwardCache& c, const DiscriminatorParams& p) {
    if (grad_u.size() != c.u.size()) throw ShapeError("disc_backward: gradient length mismatch");
    using Row = Eigen::Array<Real, 1, Eigen::Dynamic>;
    const Eigen::Index n = c.xhat.rows(), h = c.xhat.cols();
    const Real slope = p.slope;
    const Row gamma = p.gamma.array(), shift = p.shift.array(), w2 = p.w2.transpose().array();

    DiscriminatorGrads g;
    const Vector grad_logit = grad_u.array() * c.u.array() * (1.0 - c.u.array());
    g.b2 = grad_logit.sum();
    Row gw2 = Row::Zero(h), gshift = Row::Zero(h), ggamma = Row::Zero(h);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto xr = c.xhat.row(r).array();
        const Real gl = grad_logit[r];
        const Row b = xr * gamma + shift;
        gw2 += gl * b.max(slope * b);
        const Row gb = gl * w2 * (slope + (1 - slope) * (b > 0).cast<Real>());
        gshift += gb;
        ggamma += gb * xr;
    }
    g.w2 = gw2.transpose().matrix();
    g.shift = gshift.matrix();
    g.gamma = ggamma.matrix();

    // dz = inv_std / n * (n*dxhat - sum(dxhat) - xhat * sum(dxhat*xhat))
    const Row sum_gx = gshift * gamma;
    const Row sum_gx_xhat = ggamma * gamma;
    const auto nn = static_cast<Real>(n);
    const Row scale = c.inv_std.array() / nn;
    const Row w2g = nn * w2 * gamma;
    g.pre.resize(n, h);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto xr = c.xhat.row(r).array();
        const Real gl = grad_logit[r];
        const Row b = xr * gamma + shift;
        const Row gxh = gl * w2g * (slope + (1 - slope) * (b > 0).cast<Real>());
        g.pre.row(r).array() = scale * (gxh - sum_gx - xr * sum_gx_xhat);
    }
    g.b1 = g.pre.colwise().sum();
    return g;
}

DiscriminatorGrads disc_backward(const Vector& grad_u, const ForwardCache& c, const DiscriminatorParams& p) {
    if (c.input.rows() != c.u.size()) throw ArgumentError("disc_backward needs a cache from disc_forward");
    DiscriminatorGrads g = disc_backward_head(grad_u, c, p);
    g.w1.noalias() = c.input.transpose() * g.pre;
    g.input.noalias() = g.pre * p.w1.transpose();
    return g;
}

void update_running_stats(DiscriminatorParams& p, const ForwardCache& c) {
    const auto n = static_cast<Real>(c.u.size());
    const Real m = p.bn_momentum;
    const Real unbias = n > 1 ? n / (n - 1) : 1.0;
    p.running_mean = (1 - m) * p.running_mean + m * c.batch_mean;
    p.running_var = (1 - m) * p.running_var + (m * unbias) * c.batch_var;
}

}  // namespace dmad::discriminator
