#pragma once

#include "dmad/dataio/synthetic.hpp"
#include "dmad/discriminator/state.hpp"
#include "dmad/discriminator/trainer.hpp"
#include "dmad/features/backbone.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace dmad::fixture {

// Narrow model for 8x8 and 16x16 images; keeps finite differences cheap.
inline discriminator::ModelConfig tiny_model() {
    discriminator::ModelConfig m;
    m.backbone.layers = {{2, 4, 4}, {3, 8, 6}};
    m.backbone_seed = 11;
    m.fused_channels = 12;
    m.hidden = 8;
    m.sigma_smooth = 1.0;
    return m;
}

inline dataio::SynthConfig small_synth(int size) {
    dataio::SynthConfig s;
    s.image_size = size;
    s.num_classes = 1;
    s.train_per_class = 4;
    s.test_per_class = 4;
    return s;
}

// One jittered normal (or defective) bundle of a fixed object.
inline dataio::SampleBundle synthetic_bundle(int size, std::uint64_t seed, const dataio::DefectFamily* defect = nullptr) {
    const auto obj = dataio::make_object(seed);
    auto cfg = small_synth(size);
    Rng rng(seed + 1);
    auto s = dataio::render_sample(obj, cfg, rng, defect).bundle;
    s.class_name = "cls0";
    s.sample_id = "s" + std::to_string(seed);
    return s;
}

inline std::vector<discriminator::TrainingSample> training_set(int size, int n, const features::FrozenBackbone& bb,
                                                              const discriminator::ModelConfig& m) {
    const auto obj = dataio::make_object(5);
    auto cfg = small_synth(size);
    std::vector<discriminator::TrainingSample> out;
    for (int i = 0; i < n; ++i) {
        Rng rng(100 + i);
        auto b = dataio::render_sample(obj, cfg, rng).bundle;
        b.sample_id = "train_" + std::to_string(i);
        out.push_back(discriminator::make_training_sample(b, bb, m));
    }
    return out;
}

// Fresh scratch directory under the system temp dir, removed on scope exit.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("dmad_" + tag + "_" + std::to_string(rd()));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace dmad::fixture
