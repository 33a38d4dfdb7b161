#include "dmad/dataio/synthetic.hpp"

#include "dmad/core/error.hpp"
#include "dmad/dataio/sample_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace dmad::dataio {

namespace fs = std::filesystem;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string sample_name(const char* split, int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s_%04d", split, index);
    return buf;
}

// Pixel (x, y) center in unit coordinates for an image of `size` pixels,
// shifted by an integer jitter.
double unit(int p, int shift, int size) { return (p - shift + 0.5) / size; }

struct Ellipse {
    double cx, cy, rx, ry, angle;

    // Normalized radius; < 1 inside.
    double radius(double x, double y) const {
        const double c = std::cos(angle), s = std::sin(angle);
        const double dx = x - cx, dy = y - cy;
        const double a = (c * dx + s * dy) / rx;
        const double b = (-s * dx + c * dy) / ry;
        return std::sqrt(a * a + b * b);
    }
};

}  // namespace

const char* to_string(DefectFamily f) {
    switch (f) {
        case DefectFamily::depth_dent: return "depth_dent";
        case DefectFamily::color_blotch: return "color_blotch";
        case DefectFamily::combined: return "combined";
    }
    return "unknown";
}

DefectFamily defect_family_from_string(const std::string& s) {
    if (s == "depth_dent") return DefectFamily::depth_dent;
    if (s == "color_blotch") return DefectFamily::color_blotch;
    if (s == "combined") return DefectFamily::combined;
    throw ArgumentError("unknown defect family '" + s + "'");
}

bool SyntheticObject::in_support(double u, double v) const {
    return Ellipse{cx, cy, rx, ry, angle}.radius(u, v) < 1.0;
}

double SyntheticObject::height(double u, double v) const {
    double z = plane_z + base_height;
    for (const auto& b : bumps) z += b.amplitude * std::cos(kTwoPi * (b.fx * u + b.fy * v) + b.phase);
    return z;
}

double SyntheticObject::color(double u, double v, int channel) const {
    const double wave = std::sin(kTwoPi * (pattern_fx * u + pattern_fy * v) + pattern_phase);
    const double fine = std::sin(kTwoPi * (2.3 * pattern_fy * u - 1.7 * pattern_fx * v));
    return std::clamp(albedo[channel] + 0.12 * wave * pattern_dir[channel] + 0.04 * fine, 0.0, 1.0);
}

SyntheticObject make_object(std::uint64_t seed) {
    Rng rng(seed);
    SyntheticObject o;
    o.cx = uniform(rng, 0.45, 0.55);
    o.cy = uniform(rng, 0.45, 0.55);
    o.rx = uniform(rng, 0.27, 0.36);
    o.ry = uniform(rng, 0.27, 0.36);
    o.angle = uniform(rng, 0.0, std::numbers::pi);
    for (auto& b : o.bumps) {
        b.amplitude = uniform(rng, 0.02, 0.06);
        b.fx = uniform(rng, -1.5, 1.5);
        b.fy = uniform(rng, -1.5, 1.5);
        b.phase = uniform(rng, 0.0, kTwoPi);
    }
    for (int c = 0; c < 3; ++c) {
        o.albedo[static_cast<std::size_t>(c)] = uniform(rng, 0.35, 0.75);
        o.pattern_dir[static_cast<std::size_t>(c)] = uniform(rng, -1.0, 1.0);
    }
    const double theta = uniform(rng, 0.0, kTwoPi);
    const double freq = uniform(rng, 3.0, 6.0);
    o.pattern_fx = freq * std::cos(theta);
    o.pattern_fy = freq * std::sin(theta);
    o.pattern_phase = uniform(rng, 0.0, kTwoPi);
    const double bg = uniform(rng, 0.08, 0.22);
    o.background = {bg, bg, bg * 1.1};
    return o;
}

SampleBundle render_object(const SyntheticObject& obj, int size) {
    SampleBundle b;
    b.rgb = ImageRGB(size, size);
    b.depth = DepthImage(size, size);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double u = unit(x, 0, size), v = unit(y, 0, size);
            const bool inside = obj.in_support(u, v);
            b.depth.at(y, x) = inside ? obj.height(u, v) : obj.plane_z;
            for (int c = 0; c < 3; ++c) {
                b.rgb.at(y, x, c) = inside ? obj.color(u, v, c) : obj.background[static_cast<std::size_t>(c)];
            }
        }
    }
    return b;
}

SynthSample render_sample(const SyntheticObject& obj, const SynthConfig& cfg, Rng& rng, const DefectFamily* defect) {
    const int size = cfg.image_size;
    SynthSample s;
    s.shift_x = uniform_int(rng, -cfg.max_jitter, cfg.max_jitter);
    s.shift_y = uniform_int(rng, -cfg.max_jitter, cfg.max_jitter);

    SampleBundle& b = s.bundle;
    b.rgb = ImageRGB(size, size);
    b.depth = DepthImage(size, size);
    s.support = Mask(size, size);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double u = unit(x, s.shift_x, size), v = unit(y, s.shift_y, size);
            const bool inside = obj.in_support(u, v);
            s.support.at(y, x) = inside;
            b.depth.at(y, x) = inside ? obj.height(u, v) : obj.plane_z;
            for (int c = 0; c < 3; ++c) {
                b.rgb.at(y, x, c) = inside ? obj.color(u, v, c) : obj.background[static_cast<std::size_t>(c)];
            }
        }
    }

    if (defect) {
        // Defect ellipse in pixel units, centred on the object and mostly
        // overlapping it.
        Ellipse e{};
        Mask gt(size, size);
        for (int attempt = 0;; ++attempt) {
            e.rx = uniform(rng, 0.08, 0.15) * size;
            e.ry = uniform(rng, 0.08, 0.15) * size;
            e.angle = uniform(rng, 0.0, std::numbers::pi);
            e.cx = uniform(rng, 0.0, size);
            e.cy = uniform(rng, 0.0, size);
            std::size_t in_ellipse = 0, in_both = 0;
            for (int y = 0; y < size; ++y) {
                for (int x = 0; x < size; ++x) {
                    const bool hit = e.radius(x + 0.5, y + 0.5) < 1.0;
                    in_ellipse += hit;
                    gt.at(y, x) = hit && s.support.at(y, x);
                    in_both += gt.at(y, x);
                }
            }
            if (in_both > 0 && in_both * 10 >= in_ellipse * 9) break;
            if (attempt > 10000) throw Error("synthetic defect placement failed");
        }

        const bool dent = *defect != DefectFamily::color_blotch;
        const bool blotch = *defect != DefectFamily::depth_dent;
        const double amplitude = uniform(rng, 0.1, 0.4) * (uniform01(rng) < 0.5 ? -1.0 : 1.0);
        std::array<double, 3> paint{};
        do {
            for (auto& c : paint) c = uniform01(rng);
        } while (std::max({std::abs(paint[0] - obj.albedo[0]), std::abs(paint[1] - obj.albedo[1]),
                           std::abs(paint[2] - obj.albedo[2])}) < 0.3);

        for (int y = 0; y < size; ++y) {
            for (int x = 0; x < size; ++x) {
                if (!gt.at(y, x)) continue;
                if (dent) {
                    const double r = e.radius(x + 0.5, y + 0.5);
                    b.depth.at(y, x) += amplitude * (1.0 - std::pow(r, 4));
                }
                if (blotch) {
                    for (int c = 0; c < 3; ++c) b.rgb.at(y, x, c) = paint[static_cast<std::size_t>(c)];
                }
            }
        }
        b.gt_mask = std::move(gt);
        b.label = Label::anomalous;
    }

    std::normal_distribution<double> noise(0.0, cfg.pixel_noise);
    for (auto& v : b.rgb.data) v = std::clamp(v + noise(rng), 0.0, 1.0);
    for (auto& z : b.depth.z) z += noise(rng);
    for (auto& valid : b.depth.valid) valid = uniform01(rng) >= cfg.invalid_fraction;
    for (std::size_t i = 0; i < b.depth.z.size(); ++i) {
        if (!b.depth.valid[i]) b.depth.z[i] = 0.0;
    }
    return s;
}

DatasetManifest generate_synthetic_dataset(const SynthConfig& cfg, std::uint64_t seed, const fs::path& root) {
    if (cfg.num_classes <= 0 || cfg.train_per_class + cfg.test_per_class <= 0) {
        throw ArgumentError("synthetic dataset config has zero samples");
    }
    if (cfg.image_size <= 0) throw ArgumentError("image size must be positive");
    if (cfg.families.empty() && cfg.test_per_class > 0 && cfg.anomalous_fraction > 0) {
        throw ArgumentError("no defect families configured for anomalous test samples");
    }

    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec || !fs::is_directory(root)) throw IoError("cannot create dataset root " + root.string());

    DatasetManifest manifest;
    manifest.root = root;
    manifest.image_size = cfg.image_size;

    for (int ci = 0; ci < cfg.num_classes; ++ci) {
        ClassEntry entry;
        entry.class_name = "cls" + std::to_string(ci);
        entry.seed = derive_seed(seed, {static_cast<std::uint64_t>(ci)});
        const SyntheticObject obj = make_object(entry.seed);

        for (int i = 0; i < cfg.train_per_class; ++i) {
            Rng rng = make_rng(entry.seed, {0, static_cast<std::uint64_t>(i)});
            SynthSample s = render_sample(obj, cfg, rng);
            const std::string rel = entry.class_name + "/train/" + sample_name("train", i);
            s.bundle.class_name = entry.class_name;
            s.bundle.sample_id = sample_name("train", i);
            save_sample(s.bundle, root / rel);
            entry.train.push_back(rel);
        }

        // Anomalous slots are spread evenly: the first n test samples hold
        // floor(n * anomalous_fraction) defects.
        const auto anomalous_before = [&](int n) {
            return static_cast<int>(std::floor(n * cfg.anomalous_fraction + 1e-9));
        };
        for (int i = 0; i < cfg.test_per_class; ++i) {
            Rng rng = make_rng(entry.seed, {1, static_cast<std::uint64_t>(i)});
            const bool anomalous = anomalous_before(i + 1) > anomalous_before(i);
            DefectFamily family{};
            if (anomalous) family = cfg.families[static_cast<std::size_t>(anomalous_before(i)) % cfg.families.size()];
            SynthSample s = render_sample(obj, cfg, rng, anomalous ? &family : nullptr);
            const std::string rel = entry.class_name + "/test/" + sample_name("test", i);
            s.bundle.class_name = entry.class_name;
            s.bundle.sample_id = sample_name("test", i);
            save_sample(s.bundle, root / rel);
            entry.test.push_back(rel);
        }
        manifest.classes.push_back(std::move(entry));
    }
    save_manifest(manifest);
    return manifest;
}

}  // namespace dmad::dataio
