#pragma once

#include "dmad/core/rng.hpp"
#include "dmad/dataio/image.hpp"
#include "dmad/dataio/manifest.hpp"

#include <array>
#include <filesystem>
#include <vector>

namespace dmad::dataio {

// Test-split defect families. None of them is in the training-time texture
// bank (gratings, checkerboards, value noise, cells).
enum class DefectFamily { depth_dent, color_blotch, combined };

const char* to_string(DefectFamily f);
DefectFamily defect_family_from_string(const std::string& s);

struct SynthConfig {
    int image_size = 64;
    int num_classes = 3;
    int train_per_class = 50;
    int test_per_class = 30;
    double anomalous_fraction = 0.5;
    std::vector<DefectFamily> families{DefectFamily::depth_dent, DefectFamily::color_blotch, DefectFamily::combined};
    double pixel_noise = 0.01;
    int max_jitter = 2;
    double invalid_fraction = 0.01;
};

// Procedural "product": a textured elliptical body standing on a flat
// background plane at z = plane_z.
struct SyntheticObject {
    struct Bump {
        double amplitude, fx, fy, phase;
    };
    double plane_z = 0.0;
    double cx = 0, cy = 0, rx = 0, ry = 0, angle = 0;  // support ellipse, unit image coordinates
    double base_height = 0.7;
    std::array<Bump, 4> bumps{};
    std::array<double, 3> albedo{};
    std::array<double, 3> pattern_dir{};
    double pattern_fx = 0, pattern_fy = 0, pattern_phase = 0;
    std::array<double, 3> background{};

    bool in_support(double u, double v) const;
    double height(double u, double v) const;  // valid inside the support
    double color(double u, double v, int channel) const;
};

SyntheticObject make_object(std::uint64_t seed);

struct SynthSample {
    SampleBundle bundle;
    Mask support;  // true object footprint after jitter
    int shift_x = 0;
    int shift_y = 0;
};

// Clean rendering of the object (no jitter, noise, holes or defects).
SampleBundle render_object(const SyntheticObject& obj, int size);

// One jittered, noisy sample; with `defect` set, a defect of that family is
// injected and recorded as the ground-truth mask.
SynthSample render_sample(const SyntheticObject& obj, const SynthConfig& cfg, Rng& rng,
                          const DefectFamily* defect = nullptr);

// Writes <root>/<class>/{train,test}/<id>/ plus <root>/manifest.json. Each
// sample draws from make_rng(seed, {class, split, index}).
DatasetManifest generate_synthetic_dataset(const SynthConfig& cfg, std::uint64_t seed,
                                           const std::filesystem::path& root);

}  // namespace dmad::dataio
