#pragma once

#include "dmad/anomaly/config.hpp"
#include "dmad/anomaly/generators.hpp"
#include "dmad/dataio/image.hpp"
#include "dmad/dataio/manifest.hpp"
#include "dmad/discriminator/losses.hpp"
#include "dmad/discriminator/state.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace dmad::discriminator {

struct TrainConfig {
    int epochs = 160;
    int batch_size = 4;
    Real lr_adaptor = 0.00005;
    Real lr_disc = 0.0001;
    AdamSettings adam;
    std::uint64_t seed = 0;
    std::optional<int> shots;      // few-shot: train on k sampled bundles
    std::optional<int> replicate;  // few-shot replication; default ceil(train_count / k)
    anomaly::NoiseConfig noise;
    anomaly::TextureConfig texture;
    anomaly::GeneratorMix mix;
    Real focal_gamma = 2.0;
    Real focal_alpha = 0.75;

    void validate() const;
};

// Preprocessed training bundle with its (frozen) clean multiscale maps.
struct TrainingSample {
    std::string sample_id;
    preprocess::Prepared prepared;
    anomaly::ModalityPair<features::FeatureMap> clean;
};

TrainingSample make_training_sample(const dataio::SampleBundle& bundle, const features::FrozenBackbone& bb,
                                    const ModelConfig& cfg);

// Grid-cell targets: a cell is positive when at least half of its pixels
// are set.
std::vector<std::uint8_t> downsample_mask(const Mask& m, int grid_h, int grid_w);

// Everything upstream of the adaptor for one batch. The frozen extractor
// makes these inputs independent of the trainable parameters, so the loss
// is a deterministic function of the parameters given a tape.
struct BatchTape {
    int batch = 0;
    int positions = 0;  // grid positions per map
    RowMatrix o_clean;
    std::vector<RowMatrix> o_gauss;  // adaptor inputs of the image and pre-adaptor stages, when enabled
    std::vector<int> gauss_stage;    // stage index (0 or 1) of each o_gauss entry
    std::optional<RowMatrix> eps_d;  // fused-stage noise
    std::optional<RowMatrix> o_plus;
    std::vector<std::uint8_t> texture_targets;
    std::vector<anomaly::ModalityChoice> g1_choices, g2_choices, utag_choices;
};

// Draws every anomaly for the batch; sample i uses rng streams derived from
// sample_seeds[i].
BatchTape build_tape(std::span<const TrainingSample* const> batch, std::span<const std::uint64_t> sample_seeds,
                     const features::FrozenBackbone& bb, const ModelConfig& mcfg, const TrainConfig& tcfg,
                     const features::AdaptorParams& adaptor);

struct ModelGrads {
    RowMatrix adaptor;
    DiscriminatorGrads disc;
};

struct LossAndGrads {
    LossBreakdown loss;
    ModelGrads grads;
    ForwardCache cache;
};

// Total loss = 3-term sum: normal BCE (weighted by the number of Gaussian
// pathways), Gaussian BCE per enabled stage, focal loss on texture maps.
LossAndGrads loss_and_grads(const BatchTape& tape, const ModelState& state, const TrainConfig& tcfg);

// Applies one optimizer step (both learning rates) and the BN running update.
void apply_update(ModelState& state, const LossAndGrads& lg, const TrainConfig& tcfg);

LossBreakdown train_step(std::span<const TrainingSample* const> batch, std::span<const std::uint64_t> sample_seeds,
                         ModelState& state, const features::FrozenBackbone& bb, const ModelConfig& mcfg,
                         const TrainConfig& tcfg);

// Raw pointers and lengths of every trainable tensor, in a fixed order
// (adaptor, w1, b1, gamma, shift, w2, b2). flatten_grads uses the same order.
std::vector<std::pair<Real*, std::size_t>> trainable_buffers(ModelState& state);
std::vector<Real> flatten_grads(const ModelGrads& g);

struct TrainResult {
    ModelState state;
    std::vector<LossBreakdown> epoch_log;
    std::vector<std::string> train_ids;  // unique training samples used
};

using EpochCallback = std::function<void(int epoch, const LossBreakdown&)>;

// Trains on an in-memory training set.
TrainResult train(const std::vector<TrainingSample>& samples, const features::FrozenBackbone& bb, const ModelConfig& mcfg,
                  const TrainConfig& tcfg, const EpochCallback& on_epoch = {});

// Loads the class's training split from the manifest and trains on it.
TrainResult train(const dataio::DatasetManifest& manifest, const std::string& class_name,
                  const features::FrozenBackbone& bb, const ModelConfig& mcfg, const TrainConfig& tcfg,
                  const EpochCallback& on_epoch = {});

// Sample order of one epoch's worth of indices into the training set.
// Few-shot mode selects k indices (sorted) and repeats them.
std::vector<int> epoch_pool(int train_count, const TrainConfig& tcfg);

}  // namespace dmad::discriminator
