#pragma once

#include "dmad/core/tensor.hpp"
#include "dmad/dataio/manifest.hpp"
#include "dmad/discriminator/checkpoint.hpp"
#include "dmad/features/backbone.hpp"

#include <json.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dmad::metrics {

// Mann-Whitney AUROC with midranks (a tied pos/neg pair counts 1/2).
// Throws ArgumentError unless both labels occur.
Real auroc(std::span<const Real> scores, std::span<const std::uint8_t> labels);

// AUROC over the pooled pixels of every map.
Real pixel_auroc(const std::vector<Field>& scores, const std::vector<Mask>& gt);

struct Components {
    std::vector<int> labels;  // 0 = background, 1..count in first-encounter scan order
    int count = 0;
};

// 8-connected labeling.
Components connected_components(const Mask& m);

constexpr std::size_t kMaxThresholds = 10000;

// Normalized area under the per-region-overlap vs FPR curve up to
// fpr_limit. Thresholds are the unique scores, or kMaxThresholds quantiles
// of them when there are more; a pixel is positive when score >= t.
Real aupro(const std::vector<Field>& scores, const std::vector<Mask>& gt, Real fpr_limit = 0.3);

struct EvalReport {
    std::string class_name;
    Real i_auroc = 0;
    Real p_auroc = 0;
    Real p_aupro = 0;
    int n_test = 0;
    std::size_t n_pixels = 0;
    Real fpr_limit = 0.3;
};

struct SampleScore {
    std::string sample_id;
    Real image_score = 0;
    bool anomalous = false;
};

struct Evaluation {
    EvalReport report;
    std::vector<SampleScore> samples;
};

// Scores the class's test split and computes the three metrics.
Evaluation evaluate(const dataio::DatasetManifest& manifest, const std::string& class_name,
                    const discriminator::Checkpoint& model, const features::FrozenBackbone& bb, Real fpr_limit = 0.3);

nlohmann::json to_json(const EvalReport& r);

// {classes: [...], mean: {i_auroc, p_auroc, p_aupro}} with macro means.
nlohmann::json aggregate_json(const std::vector<EvalReport>& reports);

struct MeanScores {
    Real i_auroc = 0, p_auroc = 0, p_aupro = 0;
};
MeanScores macro_mean(const std::vector<EvalReport>& reports);

// Plain-text table: one row per metric, one column per class plus Mean.
std::string format_table(const std::vector<EvalReport>& reports);

}  // namespace dmad::metrics
