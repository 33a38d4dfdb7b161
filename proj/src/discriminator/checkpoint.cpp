#include "dmad/discriminator/checkpoint.hpp"

#include "dmad/core/error.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace dmad::discriminator {

namespace {

constexpr char kMagic[5] = {'B', 'A', 'D', 'M', '1'};

template <typename T>
void get_if(const nlohmann::json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("config key '") + key + "': " + e.what());
    }
}

void put_u64(std::ostream& os, std::uint64_t v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); }

std::uint64_t get_u64(std::istream& is) {
    std::uint64_t v = 0;
    if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw FormatError("truncated checkpoint");
    return v;
}

void put_tensor(std::ostream& os, const Real* data, Eigen::Index rows, Eigen::Index cols) {
    put_u64(os, static_cast<std::uint64_t>(rows));
    put_u64(os, static_cast<std::uint64_t>(cols));
    os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(sizeof(Real) * rows * cols));
}

template <typename M>
void put_tensor(std::ostream& os, const M& m) {
    put_tensor(os, m.data(), m.rows(), m.cols());
}

template <typename M>
void get_tensor(std::istream& is, M& m, Eigen::Index rows, Eigen::Index cols, const char* name) {
    const auto r = get_u64(is);
    const auto c = get_u64(is);
    if (r != static_cast<std::uint64_t>(rows) || c != static_cast<std::uint64_t>(cols)) {
        throw FormatError(std::string("checkpoint tensor '") + name + "' has shape " + std::to_string(r) + "x" +
                          std::to_string(c) + ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    m.resize(rows, cols);
    if (!is.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(sizeof(Real) * rows * cols))) {
        throw FormatError("truncated checkpoint");
    }
}

}  // namespace

nlohmann::json to_json(const ModelConfig& cfg) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : cfg.backbone.layers) {
        layers.push_back({{"layer", l.layer}, {"stride", l.stride}, {"channels", l.channels}});
    }
    return {{"backbone_layers", layers},
            {"backbone_slope", cfg.backbone.slope},
            {"backbone_seed", cfg.backbone_seed},
            {"patch_size", cfg.patch_size},
            {"fused_channels", cfg.fused_channels},
            {"hidden", cfg.hidden},
            {"adaptor_init_noise", cfg.adaptor_init_noise},
            {"tau", cfg.preprocess.tau},
            {"sigma_smooth", cfg.sigma_smooth}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw FormatError("model config must be a JSON object");
    ModelConfig cfg;
    if (j.contains("backbone_layers")) {
        const auto& arr = j.at("backbone_layers");
        if (!arr.is_array() || arr.empty()) throw FormatError("backbone_layers must be a nonempty array");
        cfg.backbone.layers.clear();
        for (const auto& l : arr) {
            features::LayerConfig lc;
            get_if(l, "layer", lc.layer);
            get_if(l, "stride", lc.stride);
            get_if(l, "channels", lc.channels);
            if (lc.stride < 1 || lc.channels < 1) throw FormatError("backbone layer needs positive stride and channels");
            cfg.backbone.layers.push_back(lc);
        }
    }
    get_if(j, "backbone_slope", cfg.backbone.slope);
    get_if(j, "backbone_seed", cfg.backbone_seed);
    get_if(j, "patch_size", cfg.patch_size);
    get_if(j, "fused_channels", cfg.fused_channels);
    get_if(j, "hidden", cfg.hidden);
    get_if(j, "adaptor_init_noise", cfg.adaptor_init_noise);
    get_if(j, "tau", cfg.preprocess.tau);
    get_if(j, "sigma_smooth", cfg.sigma_smooth);
    return cfg;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot write checkpoint " + path.string());
    const std::string cfg = to_json(ckpt.config).dump();
    os.write(kMagic, sizeof kMagic);
    put_u64(os, cfg.size());
    os.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
    put_u64(os, ckpt.config.backbone_seed);

    const auto& s = ckpt.state;
    put_tensor(os, s.adaptor.weight);
    put_tensor(os, s.disc.w1);
    put_tensor(os, s.disc.b1);
    put_tensor(os, s.disc.gamma);
    put_tensor(os, s.disc.shift);
    put_tensor(os, s.disc.w2.data(), s.disc.w2.size(), 1);
    put_tensor(os, &s.disc.b2, 1, 1);
    put_tensor(os, s.disc.running_mean);
    put_tensor(os, s.disc.running_var);
    if (!os) throw IoError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open checkpoint " + path.string());
    char magic[sizeof kMagic];
    if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        throw FormatError(path.string() + " is not a checkpoint (bad magic)");
    }
    const auto len = get_u64(is);
    if (len > (1u << 24)) throw FormatError("checkpoint config length is implausible");
    std::string text(len, '\0');
    if (!is.read(text.data(), static_cast<std::streamsize>(len))) throw FormatError("truncated checkpoint");

    Checkpoint ckpt;
    try {
        ckpt.config = model_config_from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("checkpoint config: ") + e.what());
    }
    if (get_u64(is) != ckpt.config.backbone_seed) throw FormatError("checkpoint backbone seed disagrees with its config");

    const Eigen::Index c_o = ckpt.config.concat_channels();
    const Eigen::Index c_d = ckpt.config.fused_channels;
    const Eigen::Index h = ckpt.config.hidden;
    auto& s = ckpt.state;
    s.disc = make_discriminator(static_cast<int>(c_d), static_cast<int>(h), 0);
    get_tensor(is, s.adaptor.weight, c_o, c_d, "adaptor");
    get_tensor(is, s.disc.w1, c_d, h, "w1");
    get_tensor(is, s.disc.b1, 1, h, "b1");
    get_tensor(is, s.disc.gamma, 1, h, "gamma");
    get_tensor(is, s.disc.shift, 1, h, "shift");
    get_tensor(is, s.disc.w2, h, 1, "w2");
    Eigen::Matrix<Real, 1, 1> b2;
    get_tensor(is, b2, 1, 1, "b2");
    s.disc.b2 = b2(0, 0);
    get_tensor(is, s.disc.running_mean, 1, h, "running_mean");
    get_tensor(is, s.disc.running_var, 1, h, "running_var");
    if (is.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after checkpoint tensors");
    return ckpt;
}

void write_loss_log(const std::vector<LossBreakdown>& log, const std::filesystem::path& path) {
    std::FILE* f = std::fopen(path.string().c_str(), "w");
    if (!f) throw IoError("cannot write loss log " + path.string());
    std::fprintf(f, "epoch,l_bce_n,l_bce_g,l_focal_t,total\n");
    for (std::size_t e = 0; e < log.size(); ++e) {
        const auto& l = log[e];
        std::fprintf(f, "%zu,%.17g,%.17g,%.17g,%.17g\n", e, l.l_bce_n, l.l_bce_g, l.l_focal_t, l.total);
    }
    std::fclose(f);
}

}  // namespace dmad::discriminator
