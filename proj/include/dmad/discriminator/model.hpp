#pragma once

#include "dmad/core/tensor.hpp"

#include <cstdint>

namespace dmad::discriminator {

// Per-position MLP: linear1 -> batch norm -> leaky relu -> linear2 -> sigmoid.
struct DiscriminatorParams {
    RowMatrix w1;  // C_d x hidden
    RowVector b1;
    RowVector gamma;  // batch-norm scale
    RowVector shift;  // batch-norm shift
    RowVector running_mean;
    RowVector running_var;
    Vector w2;  // hidden
    Real b2 = 0;

    Real bn_eps = 1e-5;
    Real bn_momentum = 0.1;
    Real slope = 0.3;

    int in_channels() const { return static_cast<int>(w1.rows()); }
    int hidden() const { return static_cast<int>(w1.cols()); }
};

// Xavier-normal linear weights, zero biases, unit BN scale, zero BN shift,
// running statistics (0, 1).
DiscriminatorParams make_discriminator(int in_channels, int hidden, std::uint64_t seed);

enum class Mode { train, eval };

// Intermediates kept by a train-mode forward for the backward pass.
struct ForwardCache {
    RowMatrix input;
    RowMatrix xhat;  // normalized pre-activations
    RowVector batch_mean;
    RowVector batch_var;  // biased
    RowVector inv_std;
    Vector u;
};

// Rows of `x` are positions. In train mode batch statistics are taken over
// all rows; eval mode uses the running statistics. Returns u in (0, 1).
Vector disc_forward(const RowMatrix& x, const DiscriminatorParams& p, Mode mode, ForwardCache* cache = nullptr);

// Same network entered after the first matrix product: z = x * w1 (no bias).
// The cache's input stays empty.
Vector disc_forward_preact(RowMatrix z, const DiscriminatorParams& p, Mode mode, ForwardCache* cache = nullptr);

struct DiscriminatorGrads {
    RowMatrix pre;  // dL/d(x w1), before the bias
    RowMatrix w1;
    RowVector b1;
    RowVector gamma;
    RowVector shift;
    Vector w2;
    Real b2 = 0;
    RowMatrix input;
};

// Backward of a train-mode forward given dL/du.
DiscriminatorGrads disc_backward(const Vector& grad_u, const ForwardCache& cache, const DiscriminatorParams& p);

// Everything except w1 and input; `pre` holds dL/dz for the caller to
// contract with its own inputs.
DiscriminatorGrads disc_backward_head(const Vector& grad_u, const ForwardCache& cache, const DiscriminatorParams& p);

// Exponential moving update of running mean/var (unbiased batch variance).
void update_running_stats(DiscriminatorParams& p, const ForwardCache& cache);

}  // namespace dmad::discriminator
