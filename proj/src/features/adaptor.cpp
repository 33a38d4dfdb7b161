#include "dmad/features/adaptor.hpp"

#include "dmad/core/error.hpp"
#include "dmad/core/rng.hpp"

#include <random>

namespace dmad::features {

AdaptorParams make_adaptor(int in_channels, int out_channels, std::uint64_t seed, Real noise_std) {
    if (in_channels <= 0 || out_channels <= 0) throw ArgumentError("adaptor dimensions must be positive");
    AdaptorParams a{RowMatrix::Identity(in_channels, out_channels)};
    if (noise_std > 0) {
        Rng rng(seed);
        std::normal_distribution<Real> normal(0.0, noise_std);
        for (Eigen::Index i = 0; i < a.weight.size(); ++i) a.weight.data()[i] += normal(rng);
    }
    return a;
}

FeatureMap concat_modalities(const FeatureMap& s_rgb, const FeatureMap& s_depth) {
    if (s_rgb.height != s_depth.height || s_rgb.width != s_depth.width) {
        throw ShapeError("rgb and depth feature grids differ");
    }
    FeatureMap o(s_rgb.height, s_rgb.width, s_rgb.channels() + s_depth.channels(), Stage::concatenated);
    o.values.leftCols(s_rgb.channels()) = s_rgb.values;
    o.values.rightCols(s_depth.channels()) = s_depth.values;
    return o;
}

FeatureMap apply_adaptor(const FeatureMap& o, const AdaptorParams& a) {
    if (o.channels() != a.in_channels()) throw ShapeError("adaptor input channel mismatch");
    FeatureMap d(o.height, o.width, a.out_channels(), Stage::fused);
    d.values.noalias() = o.values * a.weight;
    return d;
}

FeatureMap fuse(const FeatureMap& s_rgb, const FeatureMap& s_depth, const AdaptorParams& a) {
    return apply_adaptor(concat_modalities(s_rgb, s_depth), a);
}

AdaptorGrads adaptor_backward(const RowMatrix& grad_d, const RowMatrix& o, const AdaptorParams& a) {
    if (grad_d.rows() != o.rows() || o.cols() != a.weight.rows() || grad_d.cols() != a.weight.cols()) {
        throw ShapeError("adaptor_backward shape mismatch");
    }
    AdaptorGrads g;
    g.weight.noalias() = o.transpose() * grad_d;
    g.input.noalias() = grad_d * a.weight.transpose();
    return g;
}

}  // namespace dmad::features
