#include "dmad/anomaly/texture.hpp"

#include "dmad/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>

namespace dmad::anomaly {

namespace {

constexpr Real kTwoPi = 2 * std::numbers::pi;

Real lerp(Real a, Real b, Real t) { return a + t * (b - a); }

// Smoothly interpolated lattice noise in [0, 1], lattice spacing 1.
class ValueLattice {
public:
    ValueLattice(int n, Rng& rng) : n_(n), v_(static_cast<std::size_t>(n) * n) {
        for (auto& x : v_) x = uniform01(rng);
    }
    Real operator()(Real x, Real y) const {
        const Real fx = std::floor(x), fy = std::floor(y);
        const int ix = static_cast<int>(fx), iy = static_cast<int>(fy);
        const Real tx = perlin_fade(x - fx), ty = perlin_fade(y - fy);
        return lerp(lerp(at(iy, ix), at(iy, ix + 1), tx), lerp(at(iy + 1, ix), at(iy + 1, ix + 1), tx), ty);
    }

private:
    Real at(int y, int x) const {
        const int wy = ((y % n_) + n_) % n_, wx = ((x % n_) + n_) % n_;
        return v_[static_cast<std::size_t>(wy) * n_ + wx];
    }
    int n_;
    std::vector<Real> v_;
};

}  // namespace

Real perlin_fade(Real t) { return t * t * t * (t * (t * 6 - 15) + 10); }

Field perlin_noise(int h, int w, int res_y, int res_x, Rng& rng) {
    if (h <= 0 || w <= 0 || res_y <= 0 || res_x <= 0) throw ArgumentError("perlin_noise: sizes must be positive");
    if (h % res_y != 0 || w % res_x != 0) throw ArgumentError("perlin_noise: resolution must divide the image size");

    const int gy = res_y + 1, gx = res_x + 1;
    std::vector<Real> grad_x(static_cast<std::size_t>(gy) * gx), grad_y(grad_x.size());
    for (std::size_t i = 0; i < grad_x.size(); ++i) {
        const Real a = uniform(rng, 0.0, kTwoPi);
        grad_x[i] = std::cos(a);
        grad_y[i] = std::sin(a);
    }
    const auto dot = [&](int cy, int cx, Real oy, Real ox) {
        const auto i = static_cast<std::size_t>(cy) * gx + cx;
        return grad_y[i] * oy + grad_x[i] * ox;
    };

    Field out(w, h);
    const int cell_h = h / res_y, cell_w = w / res_x;
    for (int y = 0; y < h; ++y) {
        const int cy = y / cell_h;
        const Real ty = static_cast<Real>(y - cy * cell_h) / cell_h;
        for (int x = 0; x < w; ++x) {
            const int cx = x / cell_w;
            const Real tx = static_cast<Real>(x - cx * cell_w) / cell_w;
            const Real n00 = dot(cy, cx, ty, tx);
            const Real n01 = dot(cy, cx + 1, ty, tx - 1);
            const Real n10 = dot(cy + 1, cx, ty - 1, tx);
            const Real n11 = dot(cy + 1, cx + 1, ty - 1, tx - 1);
            const Real u = perlin_fade(tx), v = perlin_fade(ty);
            out.at(y, x) = std::numbers::sqrt2 * lerp(lerp(n00, n01, u), lerp(n10, n11, u), v);
        }
    }
    return out;
}

PerlinMask perlin_mask(int h, int w, const Mask& foreground, const TextureConfig& cfg, Rng& rng) {
    if (foreground.width != w || foreground.height != h) throw ShapeError("perlin_mask: foreground size mismatch");
    const auto pick_res = [&](int size) {
        std::vector<int> options;
        for (int k = 0; k <= cfg.max_resolution_exp; ++k) {
            if (size % (1 << k) == 0) options.push_back(1 << k);
        }
        return options[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(options.size()) - 1))];
    };

    PerlinMask result;
    for (int attempt = 0; attempt <= cfg.max_mask_retries; ++attempt) {
        const int ry = pick_res(h);
        const int rx = pick_res(w);
        const Field noise = perlin_noise(h, w, ry, rx, rng);
        const auto [lo_it, hi_it] = std::minmax_element(noise.values.begin(), noise.values.end());
        const Real lo = *lo_it, span = *hi_it - *lo_it;
        result.mask = Mask(w, h);
        for (std::size_t i = 0; i < noise.values.size(); ++i) {
            const Real norm = span > 0 ? (noise.values[i] - lo) / span : 0;
            result.mask.bits[i] = norm > cfg.threshold && foreground.bits[i];
        }
        if (!result.mask.empty_set()) return result;
    }
    result.empty = true;
    return result;
}

dataio::ImageRGB to_grayscale(const dataio::ImageRGB& img) {
    dataio::ImageRGB out = img;
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        const Real g = 0.299 * img.data[3 * i] + 0.587 * img.data[3 * i + 1] + 0.114 * img.data[3 * i + 2];
        out.data[3 * i] = out.data[3 * i + 1] = out.data[3 * i + 2] = std::clamp(g, Real{0}, Real{1});
    }
    return out;
}

dataio::ImageRGB texture_patch(int h, int w, TextureFamily family, bool grayscale, Rng& rng) {
    if (h <= 0 || w <= 0) throw ArgumentError("texture_patch: sizes must be positive");
    const Real theta = uniform(rng, 0.0, kTwoPi);
    const Real c = std::cos(theta), s = std::sin(theta);
    const Real freq = uniform(rng, 2.0, 10.0);  // cycles across the patch
    const Real phase = uniform(rng, 0.0, kTwoPi);
    const Real contrast = uniform(rng, 0.5, 1.0);
    std::array<Real, 3> c0{}, c1{};
    for (int k = 0; k < 3; ++k) {
        c0[static_cast<std::size_t>(k)] = uniform01(rng);
        c1[static_cast<std::size_t>(k)] = uniform01(rng);
    }

    // Pattern value in [0, 1] at rotated, frequency-scaled coordinates.
    std::function<Real(Real, Real)> pattern;
    switch (family) {
        case TextureFamily::grating:
            pattern = [=](Real u, Real) { return 0.5 + 0.5 * std::sin(kTwoPi * u + phase); };
            break;
        case TextureFamily::checkerboard:
            pattern = [=](Real u, Real v) {
                const Real shift = phase / kTwoPi;
                return static_cast<Real>((static_cast<long>(std::floor(u + shift)) + static_cast<long>(std::floor(v + shift))) & 1);
            };
            break;
        case TextureFamily::value_noise: {
            auto lattice = std::make_shared<ValueLattice>(64, rng);
            pattern = [=](Real u, Real v) {
                Real sum = 0, norm = 0, amp = 1, f = 1;
                for (int octave = 0; octave < 4; ++octave) {
                    sum += amp * (*lattice)(u * f + 17.0 * octave, v * f + 31.0 * octave);
                    norm += amp;
                    amp *= 0.5;
                    f *= 2;
                }
                return sum / norm;
            };
            break;
        }
        case TextureFamily::cellular: {
            const int n_points = uniform_int(rng, 8, 24);
            auto pts = std::make_shared<std::vector<std::array<Real, 2>>>();
            for (int i = 0; i < n_points; ++i) pts->push_back({uniform01(rng) * freq, uniform01(rng) * freq});
            pattern = [=](Real u, Real v) {
                Real best = 1e300;
                for (const auto& p : *pts) {
                    // Distance on the torus of side `freq` so the pattern tiles.
                    Real dx = std::fmod(std::abs(u - p[0]), freq), dy = std::fmod(std::abs(v - p[1]), freq);
                    dx = std::min(dx, freq - dx);
                    dy = std::min(dy, freq - dy);
                    best = std::min(best, std::sqrt(dx * dx + dy * dy));
                }
                return std::min(Real{1}, best * std::sqrt(static_cast<Real>(n_points)) / freq);
            };
            break;
        }
        default:
            throw ArgumentError("unknown texture family");
    }

    dataio::ImageRGB out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const Real px = (x + 0.5) / w - 0.5, py = (y + 0.5) / h - 0.5;
            const Real u = (c * px - s * py) * freq, v = (s * px + c * py) * freq;
            const Real t = 0.5 + contrast * (std::clamp(pattern(u, v), Real{0}, Real{1}) - 0.5);
            for (int k = 0; k < 3; ++k) {
                const auto kk = static_cast<std::size_t>(k);
                out.at(y, x, k) = std::clamp(lerp(c0[kk], c1[kk], t), Real{0}, Real{1});
            }
        }
    }
    return grayscale ? to_grayscale(out) : out;
}

dataio::ImageRGB blend_texture(const dataio::ImageRGB& x, const dataio::ImageRGB& t, const Mask& m, Real beta) {
    if (x.width != t.width || x.height != t.height || m.width != x.width || m.height != x.height) {
        throw ShapeError("blend_texture: dimension mismatch");
    }
    if (!(beta >= 0 && beta <= 1)) throw ArgumentError("blend_texture: beta must lie in [0, 1]");
    dataio::ImageRGB out = x;
    for (std::size_t i = 0; i < x.pixel_count(); ++i) {
        if (!m.bits[i]) continue;
        for (std::size_t k = 0; k < 3; ++k) {
            // Same value as (1-beta)*t + beta*x; this form is exact when t == x
            // or beta == 1.
            out.data[3 * i + k] = x.data[3 * i + k] + (1 - beta) * (t.data[3 * i + k] - x.data[3 * i + k]);
        }
    }
    return out;
}

Real sample_beta(const TextureConfig& cfg, Rng& rng) {
    std::normal_distribution<Real> normal(cfg.beta_mean, cfg.beta_std);
    for (;;) {
        const Real b = normal(rng);
        if (b > cfg.beta_lo && b < cfg.beta_hi) return b;
    }
}

}  // namespace dmad::anomaly
