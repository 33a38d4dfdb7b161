#include "dmad/features/backbone.hpp"

#include "dmad/core/error.hpp"
#include "dmad/core/rng.hpp"

#include <cmath>
#include <cstring>

namespace dmad::features {

int BackboneConfig::total_channels() const {
    int c = 0;
    for (const auto& l : layers) c += l.channels;
    return c;
}

FrozenBackbone::FrozenBackbone(std::uint64_t seed, BackboneConfig config) : seed_(seed), config_(std::move(config)) {
    if (config_.layers.empty()) throw ArgumentError("backbone needs at least one layer");
    for (const auto& lc : config_.layers) {
        if (lc.stride <= 0 || lc.channels <= 0) throw ArgumentError("backbone layer needs positive stride and channels");
        const int fan_in = lc.stride * lc.stride * 3;
        Rng rng = make_rng(seed_, {static_cast<std::uint64_t>(lc.layer)});
        std::normal_distribution<Real> normal(0.0, 1.0 / std::sqrt(static_cast<Real>(fan_in)));
        LayerParams p{lc, RowMatrix(fan_in, lc.channels), RowVector(lc.channels)};
        for (Eigen::Index i = 0; i < p.weight.size(); ++i) p.weight.data()[i] = normal(rng);
        for (Eigen::Index i = 0; i < p.bias.size(); ++i) p.bias[i] = normal(rng);
        layers_.push_back(std::move(p));
    }
}

const LayerParams& FrozenBackbone::layer(int j) const {
    for (const auto& l : layers_) {
        if (l.config.layer == j) return l;
    }
    throw ArgumentError("backbone has no layer " + std::to_string(j));
}

std::uint64_t FrozenBackbone::fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const auto feed = [&h](const Real* data, Eigen::Index n) {
        const auto* bytes = reinterpret_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < static_cast<std::size_t>(n) * sizeof(Real); ++i) {
            h ^= bytes[i];
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& l : layers_) {
        feed(l.weight.data(), l.weight.size());
        feed(l.bias.data(), l.bias.size());
    }
    return h;
}

FeatureMap extract_layer_features(const dataio::ImageRGB& img, const FrozenBackbone& bb, int layer) {
    const LayerParams& lp = bb.layer(layer);
    const int s = lp.config.stride;
    if (img.width % s != 0 || img.height % s != 0) {
        throw ShapeError("image " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                         " not divisible by layer stride " + std::to_string(s));
    }
    const int gh = img.height / s, gw = img.width / s;
    const int fan_in = s * s * 3;

    RowMatrix patches(gh * gw, fan_in);
    for (int py = 0; py < gh; ++py) {
        for (int px = 0; px < gw; ++px) {
            Real* row = patches.row(py * gw + px).data();
            for (int dy = 0; dy < s; ++dy) {
                const Real* src = &img.data[(static_cast<std::size_t>(py * s + dy) * img.width + px * s) * 3];
                std::memcpy(row + dy * s * 3, src, sizeof(Real) * static_cast<std::size_t>(s) * 3);
            }
        }
    }

    FeatureMap out(gh, gw, lp.config.channels, Stage::raw);
    out.values.noalias() = patches * lp.weight;
    out.values.rowwise() += lp.bias;
    const Real slope = bb.config().slope;
    out.values = out.values.unaryExpr([slope](Real x) { return x > 0 ? x : slope * x; });
    return out;
}

FeatureMap aggregate_neighborhood(const FeatureMap& v, int patch_size) {
    if (patch_size < 1 || patch_size % 2 == 0) throw ArgumentError("aggregation patch size must be odd and >= 1");
    const int r = patch_size / 2;
    FeatureMap out(v.height, v.width, v.channels(), Stage::aggregated);
    if (r == 0) {
        out.values = v.values;
        return out;
    }
    for (int h = 0; h < v.height; ++h) {
        const int h0 = std::max(0, h - r), h1 = std::min(v.height - 1, h + r);
        for (int w = 0; w < v.width; ++w) {
            const int w0 = std::max(0, w - r), w1 = std::min(v.width - 1, w + r);
            auto acc = out.at(h, w);
            for (int a = h0; a <= h1; ++a) {
                for (int b = w0; b <= w1; ++b) acc += v.at(a, b);
            }
            acc /= static_cast<Real>((h1 - h0 + 1) * (w1 - w0 + 1));
        }
    }
    return out;
}

FeatureMap resize_nearest(const FeatureMap& map, int height, int width) {
    if (height <= 0 || width <= 0) throw ArgumentError("resize target must be positive");
    FeatureMap out(height, width, map.channels(), map.stage);
    for (int h = 0; h < height; ++h) {
        const int sh = static_cast<int>(static_cast<long>(h) * map.height / height);
        for (int w = 0; w < width; ++w) {
            const int sw = static_cast<int>(static_cast<long>(w) * map.width / width);
            out.at(h, w) = map.at(sh, sw);
        }
    }
    return out;
}

FeatureMap build_multiscale(const dataio::ImageRGB& img, const FrozenBackbone& bb, int patch_size) {
    const auto& layers = bb.layers();
    // Shallowest grid = smallest stride.
    int min_stride = layers.front().config.stride;
    for (const auto& l : layers) min_stride = std::min(min_stride, l.config.stride);
    if (img.width % min_stride != 0 || img.height % min_stride != 0) {
        throw ShapeError("image dimensions not divisible by backbone strides");
    }
    const int h0 = img.height / min_stride, w0 = img.width / min_stride;

    FeatureMap out(h0, w0, bb.config().total_channels(), Stage::multiscale);
    Eigen::Index col = 0;
    for (const auto& l : layers) {
        FeatureMap agg = aggregate_neighborhood(extract_layer_features(img, bb, l.config.layer), patch_size);
        if (agg.height != h0 || agg.width != w0) agg = resize_nearest(agg, h0, w0);
        out.values.middleCols(col, agg.channels()) = agg.values;
        col += agg.channels();
    }
    return out;
}

}  // namespace dmad::features
