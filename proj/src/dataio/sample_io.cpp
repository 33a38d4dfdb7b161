#include "dmad/dataio/sample_io.hpp"

#include "dmad/core/error.hpp"
#include "dmad/dataio/png_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace dmad::dataio {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kDepthLevels = 65534;

std::uint16_t quantize_unit(Real v) {
    return static_cast<std::uint16_t>(std::lround(std::clamp(v, Real{0}, Real{1}) * 255.0));
}

DepthSidecar read_sidecar(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("missing file " + path.string());
    DepthSidecar sc;
    try {
        const json j = json::parse(in);
        sc.depth_min = j.at("depth_min").get<double>();
        sc.depth_max = j.at("depth_max").get<double>();
        sc.invalid_code = j.at("invalid_code").get<int>();
    } catch (const json::exception& e) {
        throw FormatError("corrupt depth sidecar " + path.string() + ": " + e.what());
    }
    if (!std::isfinite(sc.depth_min) || !std::isfinite(sc.depth_max) || sc.depth_max < sc.depth_min ||
        sc.invalid_code != 0) {
        throw FormatError("corrupt depth sidecar " + path.string());
    }
    return sc;
}

}  // namespace

void save_sample(const SampleBundle& bundle, const fs::path& dir) {
    validate(bundle);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    const int w = bundle.rgb.width;
    const int h = bundle.rgb.height;

    PngData rgb{w, h, 3, 8, {}};
    rgb.samples.reserve(bundle.rgb.data.size());
    for (Real v : bundle.rgb.data) rgb.samples.push_back(quantize_unit(v));
    write_png(dir / "rgb.png", rgb);

    const DepthImage& d = bundle.depth;
    DepthSidecar sc;
    sc.depth_min = std::numeric_limits<double>::infinity();
    sc.depth_max = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < d.z.size(); ++i) {
        if (!d.valid[i]) continue;
        sc.depth_min = std::min(sc.depth_min, d.z[i]);
        sc.depth_max = std::max(sc.depth_max, d.z[i]);
    }
    if (!std::isfinite(sc.depth_min)) sc.depth_min = sc.depth_max = 0.0;  // no valid pixels
    const double range = sc.depth_max - sc.depth_min;

    PngData depth{w, h, 1, 16, std::vector<std::uint16_t>(d.z.size(), 0)};
    for (std::size_t i = 0; i < d.z.size(); ++i) {
        if (!d.valid[i]) continue;
        const double t = range > 0 ? (d.z[i] - sc.depth_min) / range : 0.0;
        depth.samples[i] = static_cast<std::uint16_t>(1 + std::lround(t * kDepthLevels));
    }
    write_png(dir / "depth.png", depth);

    {
        const json j = {{"depth_min", sc.depth_min}, {"depth_max", sc.depth_max}, {"invalid_code", sc.invalid_code}};
        std::ofstream out(dir / "depth.json");
        if (!out) throw IoError("cannot write " + (dir / "depth.json").string());
        out << j.dump(2) << '\n';
    }

    if (bundle.gt_mask) {
        PngData gt{w, h, 1, 8, {}};
        gt.samples.reserve(bundle.gt_mask->bits.size());
        for (std::uint8_t b : bundle.gt_mask->bits) gt.samples.push_back(b ? 255 : 0);
        write_png(dir / "gt.png", gt);
    } else {
        fs::remove(dir / "gt.png", ec);
    }
}

SampleBundle load_sample(const fs::path& dir) {
    for (const char* name : {"rgb.png", "depth.png", "depth.json"}) {
        if (!fs::exists(dir / name)) throw IoError("missing file " + (dir / name).string());
    }

    SampleBundle b;
    b.sample_id = dir.filename().string();
    b.class_name = dir.parent_path().parent_path().filename().string();

    const PngData rgb = read_png(dir / "rgb.png");
    if (rgb.channels != 3 || rgb.bit_depth != 8) throw FormatError("rgb.png must be 8-bit RGB");
    b.rgb = ImageRGB(rgb.width, rgb.height);
    for (std::size_t i = 0; i < rgb.samples.size(); ++i) b.rgb.data[i] = rgb.samples[i] / 255.0;

    const PngData depth = read_png(dir / "depth.png");
    if (depth.channels != 1 || depth.bit_depth != 16) throw FormatError("depth.png must be 16-bit grayscale");
    if (depth.width != rgb.width || depth.height != rgb.height) {
        throw ShapeError("dimension mismatch between rgb.png and depth.png in " + dir.string());
    }
    const DepthSidecar sc = read_sidecar(dir / "depth.json");
    const double range = sc.depth_max - sc.depth_min;
    b.depth = DepthImage(depth.width, depth.height);
    for (std::size_t i = 0; i < depth.samples.size(); ++i) {
        const std::uint16_t q = depth.samples[i];
        if (q == sc.invalid_code) {
            b.depth.valid[i] = 0;
            b.depth.z[i] = 0.0;
        } else {
            b.depth.z[i] = sc.depth_min + range * (static_cast<double>(q - 1) / kDepthLevels);
        }
    }

    if (fs::exists(dir / "gt.png")) {
        const PngData gt = read_png(dir / "gt.png");
        if (gt.channels != 1) throw FormatError("gt.png must be grayscale");
        if (gt.width != rgb.width || gt.height != rgb.height) {
            throw ShapeError("dimension mismatch between gt.png and rgb.png in " + dir.string());
        }
        Mask m(gt.width, gt.height);
        for (std::size_t i = 0; i < gt.samples.size(); ++i) m.bits[i] = gt.samples[i] != 0;
        b.gt_mask = std::move(m);
        b.label = Label::anomalous;
    }
    validate(b);
    return b;
}

}  // namespace dmad::dataio
