#include "dmad/cli/experiment.hpp"

#include "dmad/core/rng.hpp"

#include "dmad/core/error.hpp"

#include <chrono>
#include <cstdio>

namespace dmad::cli {

std::uint64_t class_train_seed(std::uint64_t run_seed, std::size_t class_index) {
    return derive_seed(run_seed, {0xc1a55, class_index});
}

BenchmarkResult run_benchmark(const dataio::DatasetManifest& manifest, std::vector<std::string> classes,
                              const discriminator::ModelConfig& mcfg, const discriminator::TrainConfig& tcfg,
                              Real fpr_limit, const ProgressFn& progress) {
    const auto t0 = std::chrono::steady_clock::now();
    if (classes.empty()) {
        for (const auto& c : manifest.classes) classes.push_back(c.class_name);
    }
    const features::FrozenBackbone bb(mcfg.backbone_seed, mcfg.backbone);
    BenchmarkResult out;
    for (const auto& name : classes) {
        std::size_t index = 0;
        while (index < manifest.classes.size() && manifest.classes[index].class_name != name) ++index;
        auto cls_cfg = tcfg;
        cls_cfg.seed = class_train_seed(tcfg.seed, index);
        discriminator::EpochCallback cb;
        if (progress) cb = [&](int e, const discriminator::LossBreakdown& l) { progress(name, e, l); };
        auto trained = discriminator::train(manifest, name, bb, mcfg, cls_cfg, cb);
        const discriminator::Checkpoint ckpt{mcfg, std::move(trained.state)};
        out.reports.push_back(metrics::evaluate(manifest, name, ckpt, bb, fpr_limit).report);
        out.loss_logs.push_back(std::move(trained.epoch_log));
    }
    out.mean = metrics::macro_mean(out.reports);
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

const std::vector<std::string>& ablation_sweeps() {
    static const std::vector<std::string> names{"generators", "placement", "noise-scales"};
    return names;
}

std::vector<AblationCell> ablation_grid(const std::string& sweep, const discriminator::TrainConfig& base) {
    std::vector<AblationCell> cells;
    if (sweep == "generators") {
        auto utag = base;
        utag.mix = {false, true};
        auto mgag = base;
        mgag.mix = {true, false};
        auto both0 = base;
        both0.mix = {true, true};
        both0.noise.alpha = 0;
        both0.texture.alpha = 0;
        auto both = base;
        both.mix = {true, true};
        both.noise.alpha = 1.0 / 3.0;
        both.texture.alpha = 1.0 / 3.0;
        cells = {{"utag", utag}, {"mgag", mgag}, {"utag+mgag(alpha=0)", both0}, {"utag+mgag(alpha=1/3)", both}};
    } else if (sweep == "placement") {
        for (int bits : {1, 2, 4, 3, 5, 6, 7}) {
            auto t = base;
            t.mix.use_mgag = true;
            std::string label;
            for (int k = 0; k < 3; ++k) {
                t.noise.stages[static_cast<std::size_t>(k)] = (bits >> k) & 1;
                if ((bits >> k) & 1) label += (label.empty() ? "G" : "+G") + std::to_string(k + 1);
            }
            cells.push_back({label, t});
        }
    } else if (sweep == "noise-scales") {
        constexpr Real x = 0;  // stage disabled
        const Real grid[9][3] = {{0.02, 0.02, 0.02}, {0.04, 0.04, 0.04}, {0.12, 0.12, 0.12},
                                 {x, 0.02, 0.02},    {x, 0.04, 0.02},    {0.02, x, 0.02},
                                 {0.12, x, 0.02},    {0.04, 0.03, 0.02}, {0.12, 0.04, 0.02}};
        for (const auto& row : grid) {
            auto t = base;
            t.mix.use_mgag = true;
            std::string label;
            for (int k = 0; k < 3; ++k) {
                const bool on = row[k] > 0;
                t.noise.stages[static_cast<std::size_t>(k)] = on;
                if (on) (k == 0 ? t.noise.sigma1 : k == 1 ? t.noise.sigma2 : t.noise.sigma3) = row[k];
                char buf[16];
                std::snprintf(buf, sizeof buf, "%g", row[k]);
                label += (k ? "/" : "") + (on ? std::string(buf) : std::string("x"));
            }
            cells.push_back({label, t});
        }
    } else {
        throw ArgumentError("unknown sweep '" + sweep + "' (expected generators, placement or noise-scales)");
    }
    return cells;
}

}  // namespace dmad::cli
