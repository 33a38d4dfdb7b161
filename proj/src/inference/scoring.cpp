#include "dmad/inference/scoring.hpp"

#include "dmad/anomaly/generators.hpp"
#include "dmad/core/error.hpp"
#include "dmad/features/adaptor.hpp"
#include "dmad/preprocess/preprocess.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>

namespace dmad::inference {

namespace {

int reflect101(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
}

}  // namespace

Field bilinear_upsample(const Field& map, int height, int width) {
    if (height < map.height || width < map.width) throw ArgumentError("bilinear_upsample cannot shrink a map");
    if (map.height == 0 || map.width == 0) throw ShapeError("bilinear_upsample on an empty map");
    Field out(width, height);
    const auto axis = [](int dst, int out_n, int in_n, int& i0, int& i1, Real& frac) {
        Real src = (dst + 0.5) * in_n / out_n - 0.5;
        src = std::clamp<Real>(src, 0, in_n - 1);
        i0 = static_cast<int>(std::floor(src));
        i1 = std::min(i0 + 1, in_n - 1);
        frac = src - i0;
    };
    for (int y = 0; y < height; ++y) {
        int y0, y1;
        Real fy;
        axis(y, height, map.height, y0, y1, fy);
        for (int x = 0; x < width; ++x) {
            int x0, x1;
            Real fx;
            axis(x, width, map.width, x0, x1, fx);
            const Real top = map.at(y0, x0) + fx * (map.at(y0, x1) - map.at(y0, x0));
            const Real bot = map.at(y1, x0) + fx * (map.at(y1, x1) - map.at(y1, x0));
            out.at(y, x) = top + fy * (bot - top);
        }
    }
    return out;
}

std::vector<Real> gaussian_kernel(Real sigma) {
    if (!(sigma >= 0)) throw ArgumentError("smoothing sigma must be >= 0");
    if (sigma == 0) return {1.0};
    const int r = static_cast<int>(std::ceil(3 * sigma));
    std::vector<Real> k(static_cast<std::size_t>(2 * r + 1));
    Real sum = 0;
    for (int i = -r; i <= r; ++i) {
        k[static_cast<std::size_t>(i + r)] = std::exp(-(i * i) / (2 * sigma * sigma));
        sum += k[static_cast<std::size_t>(i + r)];
    }
    for (auto& v : k) v /= sum;
    return k;
}

Field gaussian_smooth(const Field& map, Real sigma) {
    const auto k = gaussian_kernel(sigma);
    if (sigma == 0) return map;
    const int r = static_cast<int>(k.size() / 2);
    Field tmp(map.width, map.height), out(map.width, map.height);
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            Real acc = 0;
            for (int i = -r; i <= r; ++i) acc += k[static_cast<std::size_t>(i + r)] * map.at(y, reflect101(x + i, map.width));
            tmp.at(y, x) = acc;
        }
    }
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            Real acc = 0;
            for (int i = -r; i <= r; ++i) acc += k[static_cast<std::size_t>(i + r)] * tmp.at(reflect101(y + i, map.height), x);
            out.at(y, x) = acc;
        }
    }
    return out;
}

ScoreMap score_from_grid(const Field& grid, int height, int width, Real sigma_smooth) {
    ScoreMap s;
    s.pixel_scores = gaussian_smooth(bilinear_upsample(grid, height, width), sigma_smooth);
    s.image_score = *std::max_element(s.pixel_scores.values.begin(), s.pixel_scores.values.end());
    return s;
}

Field predict_grid(const dataio::SampleBundle& bundle, const discriminator::Checkpoint& model,
                   const features::FrozenBackbone& bb) {
    const auto& cfg = model.config;
    if (bb.seed() != cfg.backbone_seed || bb.config().total_channels() != cfg.backbone.total_channels()) {
        throw ShapeError("backbone does not match the checkpoint");
    }
    const auto prepared = preprocess::prepare(bundle, cfg.preprocess);
    const auto clean = anomaly::clean_multiscale(prepared, bb, cfg.patch_size);
    const auto o = features::concat_modalities(clean.rgb, clean.depth);
    if (o.channels() != model.state.adaptor.in_channels()) {
        throw ShapeError("feature width " + std::to_string(o.channels()) + " does not match the checkpoint adaptor (" +
                         std::to_string(model.state.adaptor.in_channels()) + ")");
    }
    const RowMatrix d = o.values * model.state.adaptor.weight;
    const Vector u = discriminator::disc_forward(d, model.state.disc, discriminator::Mode::eval);
    Field grid(o.width, o.height);
    std::copy(u.data(), u.data() + u.size(), grid.values.begin());
    return grid;
}

ScoreMap score_sample(const dataio::SampleBundle& bundle, const discriminator::Checkpoint& model,
                      const features::FrozenBackbone& bb) {
    return score_from_grid(predict_grid(bundle, model, bb), bundle.rgb.height, bundle.rgb.width,
                           model.config.sigma_smooth);
}

void write_score(const ScoreMap& s, const std::string& sample_id, const std::filesystem::path& stem) {
    static_assert(std::endian::native == std::endian::little);
    auto map_path = stem;
    map_path += ".f32";
    {
        std::ofstream os(map_path, std::ios::binary | std::ios::trunc);
        if (!os) throw IoError("cannot write " + map_path.string());
        const std::uint32_t hw[2] = {static_cast<std::uint32_t>(s.pixel_scores.height),
                                     static_cast<std::uint32_t>(s.pixel_scores.width)};
        os.write(reinterpret_cast<const char*>(hw), sizeof hw);
        std::vector<float> f(s.pixel_scores.values.begin(), s.pixel_scores.values.end());
        os.write(reinterpret_cast<const char*>(f.data()), static_cast<std::streamsize>(f.size() * sizeof(float)));
    }
    auto json_path = stem;
    json_path += ".json";
    std::ofstream js(json_path, std::ios::trunc);
    if (!js) throw IoError("cannot write " + json_path.string());
    const nlohmann::json j = {
        {"sample_id", sample_id}, {"image_score", s.image_score}, {"map_path", map_path.filename().string()}};
    js << j.dump(2) << '\n';
}

Field read_score_map(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    std::uint32_t hw[2];
    if (!is.read(reinterpret_cast<char*>(hw), sizeof hw)) throw FormatError("truncated score map");
    std::vector<float> f(static_cast<std::size_t>(hw[0]) * hw[1]);
    if (!is.read(reinterpret_cast<char*>(f.data()), static_cast<std::streamsize>(f.size() * sizeof(float)))) {
        throw FormatError("truncated score map");
    }
    Field out(static_cast<int>(hw[1]), static_cast<int>(hw[0]));
    std::copy(f.begin(), f.end(), out.values.begin());
    return out;
}

}  // namespace dmad::inference
