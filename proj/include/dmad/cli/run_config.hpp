#pragma once

#include "dmad/anomaly/config.hpp"
#include "dmad/dataio/synthetic.hpp"
#include "dmad/discriminator/state.hpp"
#include "dmad/discriminator/trainer.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace dmad::cli {

// Everything a command needs. Loaded from JSON, then overridden by flags.
struct RunConfig {
    std::uint64_t seed = 0;
    std::filesystem::path out = "out";
    std::filesystem::path data_root = "data";
    std::vector<std::string> classes;  // empty: every class in the manifest
    dataio::SynthConfig synth;
    discriminator::ModelConfig model;
    discriminator::TrainConfig train;
    Real fpr_limit = 0.3;

    // Cross-field checks; throws ArgumentError.
    void validate() const;
};

nlohmann::json to_json(const anomaly::NoiseConfig& c);
nlohmann::json to_json(const anomaly::TextureConfig& c);
nlohmann::json to_json(const RunConfig& c);

// Keys absent from `j` keep the values already in `cfg`.
void apply_json(const nlohmann::json& j, RunConfig& cfg);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace dmad::cli
