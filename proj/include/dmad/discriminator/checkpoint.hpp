#pragma once

#include "dmad/discriminator/losses.hpp"
#include "dmad/discriminator/state.hpp"

#include <json.hpp>

#include <filesystem>
#include <vector>

namespace dmad::discriminator {

nlohmann::json to_json(const ModelConfig& cfg);
// Missing keys keep their defaults; wrong types raise FormatError.
ModelConfig model_config_from_json(const nlohmann::json& j);

struct Checkpoint {
    ModelConfig config;
    ModelState state;  // optimizer moments are not stored
};

// Binary layout (little-endian): "BADM1", u64 config length, config JSON,
// u64 backbone seed, then adaptor, w1, b1, gamma, shift, w2, b2,
// running_mean, running_var; each tensor is u64 rows, u64 cols, f64 data.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// CSV: epoch,l_bce_n,l_bce_g,l_focal_t,total
void write_loss_log(const std::vector<LossBreakdown>& log, const std::filesystem::path& path);

}  // namespace dmad::discriminator
