#include "support/fixtures.hpp"

#include "dmad/core/error.hpp"
#include "dmad/dataio/heatmap.hpp"
#include "dmad/dataio/manifest.hpp"
#include "dmad/dataio/png_io.hpp"
#include "dmad/dataio/sample_io.hpp"
#include "dmad/dataio/synthetic.hpp"
#include "dmad/preprocess/preprocess.hpp"

#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <iterator>

using namespace dmad;
using namespace dmad::dataio;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

// Every file under `a` exists under `b` with identical bytes, and vice versa.
bool same_tree(const fs::path& a, const fs::path& b) {
    std::vector<fs::path> fa, fb;
    for (auto& e : fs::recursive_directory_iterator(a))
        if (e.is_regular_file()) fa.push_back(fs::relative(e.path(), a));
    for (auto& e : fs::recursive_directory_iterator(b))
        if (e.is_regular_file()) fb.push_back(fs::relative(e.path(), b));
    std::sort(fa.begin(), fa.end());
    std::sort(fb.begin(), fb.end());
    if (fa != fb) return false;
    for (auto& rel : fa)
        if (slurp(a / rel) != slurp(b / rel)) return false;
    return true;
}

SampleBundle random_bundle(int w, int h, std::uint64_t seed, bool anomalous) {
    Rng rng(seed);
    SampleBundle b;
    b.rgb = ImageRGB(w, h);
    for (auto& v : b.rgb.data) v = uniform01(rng);
    b.depth = DepthImage(w, h);
    for (auto& z : b.depth.z) z = uniform(rng, -0.3, 1.2);
    for (auto& v : b.depth.valid) v = uniform01(rng) > 0.1;
    for (std::size_t i = 0; i < b.depth.z.size(); ++i)
        if (!b.depth.valid[i]) b.depth.z[i] = 0;
    if (anomalous) {
        b.label = Label::anomalous;
        Mask m(w, h);
        m.at(h / 2, w / 2) = 1;
        m.at(0, 1) = 1;
        b.gt_mask = m;
    }
    return b;
}

}  // namespace

TEST_CASE("sample round trip stays within the quantization bounds") {
    fixture::TempDir tmp("io");
    for (int trial = 0; trial < 5; ++trial) {
        const auto b = random_bundle(13, 9, 40 + trial, trial % 2 == 1);
        const fs::path dir = tmp.path() / "cls" / "test" / ("s" + std::to_string(trial));
        save_sample(b, dir);
        const auto r = load_sample(dir);
        REQUIRE(r.rgb.width == 13);
        REQUIRE(r.rgb.height == 9);
        for (std::size_t i = 0; i < b.rgb.data.size(); ++i) CHECK(std::abs(r.rgb.data[i] - b.rgb.data[i]) <= 1.0 / 255);

        double lo = 1e300, hi = -1e300;
        for (std::size_t i = 0; i < b.depth.z.size(); ++i)
            if (b.depth.valid[i]) lo = std::min(lo, b.depth.z[i]), hi = std::max(hi, b.depth.z[i]);
        for (std::size_t i = 0; i < b.depth.z.size(); ++i) {
            CHECK(r.depth.valid[i] == b.depth.valid[i]);
            if (b.depth.valid[i]) CHECK(std::abs(r.depth.z[i] - b.depth.z[i]) <= (hi - lo) / 65535);
        }
        CHECK(r.label == b.label);
        CHECK(r.gt_mask.has_value() == b.gt_mask.has_value());
        if (b.gt_mask) CHECK(r.gt_mask->bits == b.gt_mask->bits);
        CHECK(r.class_name == "cls");
        CHECK(r.sample_id == "s" + std::to_string(trial));
    }
}

TEST_CASE("loading a sample without rgb.png is a missing-file error") {
    fixture::TempDir tmp("io");
    const fs::path dir = tmp.path() / "c" / "train" / "a";
    save_sample(random_bundle(4, 4, 1, false), dir);
    fs::remove(dir / "rgb.png");
    CHECK_THROWS_AS(load_sample(dir), IoError);
}

TEST_CASE("rgb and depth of different size are rejected") {
    fixture::TempDir tmp("io");
    const fs::path dir = tmp.path() / "c" / "train" / "a";
    save_sample(random_bundle(32, 32, 1, false), dir);
    const fs::path other = tmp.path() / "c" / "train" / "b";
    save_sample(random_bundle(64, 64, 2, false), other);
    fs::copy_file(other / "depth.png", dir / "depth.png", fs::copy_options::overwrite_existing);
    CHECK_THROWS_AS(load_sample(dir), ShapeError);

    auto b = random_bundle(32, 32, 1, false);
    b.depth = DepthImage(64, 64);
    CHECK_THROWS_AS(validate(b), ShapeError);
}

TEST_CASE("bundle invariants") {
    auto b = random_bundle(5, 5, 3, false);
    CHECK_NOTHROW(validate(b));
    b.gt_mask = Mask(5, 5);
    CHECK_THROWS_AS(validate(b), FormatError);
    b.label = Label::anomalous;
    CHECK_NOTHROW(validate(b));
    b.gt_mask = Mask(4, 5);
    CHECK_THROWS_AS(validate(b), ShapeError);
    b.gt_mask = Mask(5, 5);
    b.rgb.data[0] = 1.5;
    CHECK_THROWS_AS(validate(b), FormatError);
}

TEST_CASE("manifest rejects missing samples and duplicate ids") {
    fixture::TempDir tmp("man");
    DatasetManifest m;
    m.root = tmp.path();
    m.image_size = 4;
    ClassEntry c;
    c.class_name = "c";
    c.train = {"c/train/a"};
    m.classes.push_back(c);
    save_manifest(m);
    CHECK_THROWS_AS(load_manifest(tmp.path()), IoError);

    save_sample(random_bundle(4, 4, 1, false), tmp.path() / "c/train/a");
    CHECK(load_manifest(tmp.path()).classes.at(0).train.size() == 1);

    m.classes[0].train = {"c/train/a", "c/train/a"};
    save_manifest(m);
    CHECK_THROWS_AS(load_manifest(tmp.path()), FormatError);
    CHECK_THROWS_AS(load_manifest(tmp.path() / "nowhere"), IoError);
    CHECK_THROWS_AS(m.find("zzz"), ArgumentError);
}

TEST_CASE("synthetic generation is deterministic under a seed") {
    fixture::TempDir tmp("gen");
    auto cfg = fixture::small_synth(16);
    cfg.num_classes = 2;
    const auto m1 = generate_synthetic_dataset(cfg, 7, tmp.path() / "a");
    const auto m2 = generate_synthetic_dataset(cfg, 7, tmp.path() / "b");
    CHECK(m1.classes.size() == 2);
    CHECK(m1.classes[0].train.size() == 4);
    CHECK(m1.classes[0].test.size() == 4);
    CHECK(same_tree(tmp.path() / "a", tmp.path() / "b"));

    generate_synthetic_dataset(cfg, 8, tmp.path() / "c");
    CHECK_FALSE(same_tree(tmp.path() / "a", tmp.path() / "c"));
}

TEST_CASE("one class, one train sample, no test split") {
    fixture::TempDir tmp("gen");
    SynthConfig cfg;
    cfg.image_size = 16;
    cfg.num_classes = 1;
    cfg.train_per_class = 1;
    cfg.test_per_class = 0;
    const auto m = generate_synthetic_dataset(cfg, 0, tmp.path());
    REQUIRE(m.classes.size() == 1);
    CHECK(m.classes[0].train.size() == 1);
    CHECK(m.classes[0].test.empty());
    const auto b = load_sample(m.resolve(m.classes[0].train[0]));
    CHECK(b.label == Label::normal);
    CHECK_FALSE(b.gt_mask.has_value());
}

TEST_CASE("anomalous test bundles have a nonempty mask inside the foreground") {
    fixture::TempDir tmp("gen");
    SynthConfig cfg;
    cfg.num_classes = 2;
    cfg.train_per_class = 0;
    cfg.test_per_class = 12;
    const auto m = generate_synthetic_dataset(cfg, 3, tmp.path());
    int anomalous = 0;
    for (const auto& c : m.classes) {
        for (const auto& rel : c.test) {
            const auto b = load_sample(m.resolve(rel));
            if (b.label == Label::normal) {
                CHECK_FALSE(b.gt_mask.has_value());
                continue;
            }
            ++anomalous;
            REQUIRE(b.gt_mask.has_value());
            CHECK(b.gt_mask->count() >= 1);
            const auto fg = preprocess::prepare(b).foreground;
            std::size_t outside = 0;
            for (std::size_t i = 0; i < fg.bits.size(); ++i) outside += b.gt_mask->bits[i] && !fg.bits[i];
            // The foreground is estimated from noisy depth, so allow a thin
            // boundary disagreement.
            CHECK(outside * 20 <= b.gt_mask->count());
        }
    }
    CHECK(anomalous == 12);
}

TEST_CASE("generated defects sit inside the true object support") {
    const auto obj = make_object(9);
    SynthConfig cfg;
    for (int i = 0; i < 30; ++i) {
        Rng rng(i);
        const auto fam = static_cast<DefectFamily>(i % 3);
        const auto s = render_sample(obj, cfg, rng, &fam);
        REQUIRE(s.bundle.gt_mask.has_value());
        CHECK(s.bundle.gt_mask->count() > 0);
        for (std::size_t k = 0; k < s.support.bits.size(); ++k)
            if (s.bundle.gt_mask->bits[k]) CHECK(s.support.bits[k]);
    }
}

TEST_CASE("heatmap rendering") {
    fixture::TempDir tmp("heat");
    SUBCASE("constant map is one colour") {
        save_heatmap(Field(6, 4, 0.3), tmp.path() / "c.png");
        const auto png = read_png(tmp.path() / "c.png");
        REQUIRE(png.channels == 3);
        for (int i = 0; i < png.width * png.height; ++i)
            for (int c = 0; c < 3; ++c) CHECK(png.samples[i * 3 + c] == colormap()[0][c]);
    }
    SUBCASE("maximum pixel takes the last colormap entry") {
        Field f(5, 5, 0.1);
        f.at(2, 3) = 0.9;
        f.at(0, 0) = 0.0;
        save_heatmap(f, tmp.path() / "m.png");
        const auto png = read_png(tmp.path() / "m.png");
        const int i = 2 * 5 + 3;
        for (int c = 0; c < 3; ++c) CHECK(png.samples[i * 3 + c] == colormap()[255][c]);
        save_heatmap(f, tmp.path() / "m2.png");
        CHECK(slurp(tmp.path() / "m.png") == slurp(tmp.path() / "m2.png"));
    }
    SUBCASE("colormap anchors") {
        CHECK(colormap()[0] == Rgb8{0, 0, 128});
        CHECK(colormap()[85] == Rgb8{0, 255, 255});
        CHECK(colormap()[170] == Rgb8{255, 255, 0});
        CHECK(colormap()[255] == Rgb8{128, 0, 0});
    }
}

TEST_CASE("png round trip keeps 16-bit samples") {
    fixture::TempDir tmp("png");
    PngData p;
    p.width = 3;
    p.height = 2;
    p.channels = 1;
    p.bit_depth = 16;
    p.samples = {0, 1, 65535, 300, 40000, 7};
    write_png(tmp.path() / "d.png", p);
    const auto r = read_png(tmp.path() / "d.png");
    CHECK(r.bit_depth == 16);
    CHECK(r.samples == p.samples);
    std::ofstream(tmp.path() / "bad.png") << "not a png";
    CHECK_THROWS_AS(read_png(tmp.path() / "bad.png"), FormatError);
}
