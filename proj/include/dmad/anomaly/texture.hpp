#pragma once

#include "dmad/anomaly/config.hpp"
#include "dmad/core/rng.hpp"
#include "dmad/core/tensor.hpp"
#include "dmad/dataio/image.hpp"

namespace dmad::anomaly {

Real perlin_fade(Real t);  // 6t^5 - 15t^4 + 10t^3

// Classic 2-D gradient noise on a (res_y+1) x (res_x+1) lattice of random
// unit gradients, quintic fade, scaled by sqrt(2) into [-1, 1]. Lattice
// points fall on pixels y = k*h/res_y, x = l*w/res_x where the value is 0.
Field perlin_noise(int h, int w, int res_y, int res_x, Rng& rng);

struct PerlinMask {
    Mask mask;
    bool empty = false;  // every attempt produced an empty intersection
};

// m_p = minmax-normalized Perlin field > threshold with per-axis
// resolutions 2^k, k uniform in 0..max_resolution_exp (restricted to
// divisors of the image size); returns m_p AND foreground, redrawn up to
// max_mask_retries times while empty.
PerlinMask perlin_mask(int h, int w, const Mask& foreground, const TextureConfig& cfg, Rng& rng);

// Procedural texture with random orientation, frequency, phase and contrast.
// grayscale=true converts the colour patch to luminance in all channels.
dataio::ImageRGB texture_patch(int h, int w, TextureFamily family, bool grayscale, Rng& rng);

dataio::ImageRGB to_grayscale(const dataio::ImageRGB& img);

// out = x*(1-m) + (1-beta)*t*m + beta*x*m, per channel.
dataio::ImageRGB blend_texture(const dataio::ImageRGB& x, const dataio::ImageRGB& t, const Mask& m, Real beta);

// normal(beta_mean, beta_std^2) conditioned on the open interval (beta_lo, beta_hi).
Real sample_beta(const TextureConfig& cfg, Rng& rng);

}  // namespace dmad::anomaly
