#pragma once

#include "dmad/dataio/manifest.hpp"
#include "dmad/discriminator/checkpoint.hpp"
#include "dmad/discriminator/trainer.hpp"
#include "dmad/metrics/metrics.hpp"

#include <functional>
#include <string>
#include <vector>

namespace dmad::cli {

struct BenchmarkResult {
    std::vector<metrics::EvalReport> reports;
    metrics::MeanScores mean;
    std::vector<std::vector<discriminator::LossBreakdown>> loss_logs;  // per class
    double seconds = 0;
};

using ProgressFn = std::function<void(const std::string& class_name, int epoch, const discriminator::LossBreakdown&)>;

// Per-class training seed; keeps classes independent under one run seed.
std::uint64_t class_train_seed(std::uint64_t run_seed, std::size_t class_index);

// Trains one model per class (in memory) and evaluates it on the test split.
// An empty class list means every class in the manifest.
BenchmarkResult run_benchmark(const dataio::DatasetManifest& manifest, std::vector<std::string> classes,
                              const discriminator::ModelConfig& mcfg, const discriminator::TrainConfig& tcfg,
                              Real fpr_limit, const ProgressFn& progress = {});

struct AblationCell {
    std::string label;
    discriminator::TrainConfig train;
};

// Named sweeps over a base training config:
//   generators    UTAG, MGAG, both with alpha = 0, both with alpha = 1/3
//   placement     the seven non-empty subsets of stages G1..G3
//   noise-scales  nine (sigma1, sigma2, sigma3) triples; a disabled stage is "x"
// Throws ArgumentError on an unknown name.
std::vector<AblationCell> ablation_grid(const std::string& sweep, const discriminator::TrainConfig& base);

const std::vector<std::string>& ablation_sweeps();

}  // namespace dmad::cli
