#include "support/fixtures.hpp"

#include "dmad/anomaly/gaussian.hpp"
#include "dmad/anomaly/generators.hpp"
#include "dmad/anomaly/texture.hpp"
#include "dmad/core/error.hpp"

#include <doctest.h>

#include <array>
#include <cmath>

using namespace dmad;
using namespace dmad::anomaly;
using dataio::ImageRGB;

namespace {

ImageRGB random_image(int w, int h, Rng& rng) {
    ImageRGB img(w, h);
    for (auto& v : img.data) v = uniform01(rng);
    return img;
}

Mask random_mask(int w, int h, Rng& rng) {
    Mask m(w, h);
    for (auto& b : m.bits) b = uniform01(rng) < 0.4;
    return m;
}

}  // namespace

TEST_CASE("gaussian field statistics") {
    CHECK(NoiseConfig::standard().sigma1 == 0.12);
    CHECK(NoiseConfig::standard().sigma2 == 0.06);
    CHECK(NoiseConfig::standard().sigma3 == 0.02);

    Rng rng(1);
    const auto f = sample_gaussian_field(1000000, 0.12, rng);
    double sum = 0, sq = 0;
    for (double v : f) sum += v;
    const double mean = sum / f.size();
    for (double v : f) sq += (v - mean) * (v - mean);
    CHECK(std::abs(mean) <= 0.001);
    CHECK(std::abs(std::sqrt(sq / f.size()) - 0.12) <= 0.002);

    Rng a(9), b(9);
    CHECK(sample_gaussian_field(100, 0.3, a) == sample_gaussian_field(100, 0.3, b));
    CHECK_THROWS_AS(sample_gaussian_field(3, 0.0, a), ArgumentError);
}

TEST_CASE("vanishing sigma leaves inputs unchanged") {
    Rng rng(2);
    RowMatrix x = RowMatrix::Random(5, 4);
    CHECK((inject_stage_noise(x, 1e-12, rng) - x).cwiseAbs().maxCoeff() <= 1e-9);
    const auto img = random_image(6, 6, rng);
    const auto noisy = inject_image_noise(img, 1e-12, rng);
    for (std::size_t i = 0; i < img.data.size(); ++i) CHECK(std::abs(noisy.data[i] - img.data[i]) <= 1e-9);
    for (double v : inject_image_noise(img, 5.0, rng).data) CHECK((v >= 0.0 && v <= 1.0));
}

TEST_CASE("selective modality") {
    SUBCASE("branch frequencies at alpha = 1/3") {
        Rng rng(3);
        std::array<int, 3> n{};
        const int draws = 30000;
        for (int i = 0; i < draws; ++i) ++n[static_cast<std::size_t>(draw_modality(1.0 / 3.0, rng))];
        for (int k : n) CHECK(std::abs(k / double(draws) - 1.0 / 3.0) <= 0.02);
    }
    SUBCASE("frequencies follow (1-2a, a, a) within three standard errors") {
        Rng rng(4);
        for (double a : {0.1, 0.25, 0.5}) {
            std::array<int, 3> n{};
            const int draws = 20000;
            for (int i = 0; i < draws; ++i) ++n[static_cast<std::size_t>(draw_modality(a, rng))];
            const std::array<double, 3> p{1 - 2 * a, a, a};
            for (std::size_t k = 0; k < 3; ++k) {
                const double se = std::sqrt(p[k] * (1 - p[k]) / draws);
                CHECK(std::abs(n[k] / double(draws) - p[k]) <= 3 * se + 1e-12);
            }
        }
    }
    SUBCASE("alpha = 0 always picks both") {
        Rng rng(5);
        for (int i = 0; i < 1000; ++i) CHECK(draw_modality(0.0, rng) == ModalityChoice::both);
    }
    SUBCASE("alpha outside [0, 1/2]") {
        Rng rng(6);
        CHECK_THROWS_AS(draw_modality(0.6, rng), ArgumentError);
        CHECK_THROWS_AS(draw_modality(-0.1, rng), ArgumentError);
        NoiseConfig c;
        c.alpha = 0.7;
        CHECK_THROWS_AS(c.validate(), ArgumentError);
    }
    SUBCASE("pairing") {
        for (std::uint64_t s = 0; s < 50; ++s) {
            Rng r1(s), r2(s);
            const auto sel = select_modality<int>({1, 2}, {10, 20}, 0.4, r1);
            switch (draw_modality(0.4, r2)) {
                case ModalityChoice::both: CHECK((sel.pair.rgb == 1 && sel.pair.depth == 2)); break;
                case ModalityChoice::rgb_only: CHECK((sel.pair.rgb == 1 && sel.pair.depth == 20)); break;
                case ModalityChoice::depth_only: CHECK((sel.pair.rgb == 10 && sel.pair.depth == 2)); break;
            }
        }
    }
}

TEST_CASE("perlin noise") {
    CHECK(perlin_fade(0.0) == 0.0);
    CHECK(perlin_fade(1.0) == 1.0);
    CHECK(perlin_fade(0.5) == 0.5);
    CHECK(perlin_fade(0.25) == doctest::Approx(1 - perlin_fade(0.75)));

    Rng rng(7);
    for (auto [ry, rx] : std::array<std::pair<int, int>, 4>{{{1, 1}, {2, 4}, {8, 8}, {32, 16}}}) {
        const auto f = perlin_noise(64, 64, ry, rx, rng);
        for (int k = 0; k < ry; ++k)
            for (int l = 0; l < rx; ++l) CHECK(f.at(k * 64 / ry, l * 64 / rx) == 0.0);
        for (double v : f.values) CHECK((v >= -1.0 && v <= 1.0));
    }
    const auto wide = perlin_noise(256, 256, 4, 4, rng);
    double worst = 0;
    for (int y = 0; y < 256; ++y)
        for (int x = 0; x + 1 < 256; ++x) worst = std::max(worst, std::abs(wide.at(y, x + 1) - wide.at(y, x)));
    CHECK(worst <= 0.15);

    Rng a(8), b(8);
    CHECK(perlin_noise(16, 16, 4, 2, a).values == perlin_noise(16, 16, 4, 2, b).values);
    CHECK_THROWS_AS(perlin_noise(10, 10, 3, 3, a), ArgumentError);
}

TEST_CASE("perlin mask") {
    TextureConfig cfg;
    Rng rng(9);
    SUBCASE("empty foreground") {
        const auto m = perlin_mask(16, 16, Mask(16, 16), cfg, rng);
        CHECK(m.empty);
        CHECK(m.mask.count() == 0);
    }
    SUBCASE("threshold 0 keeps everything above the minimum") {
        cfg.threshold = 0.0;
        const auto m = perlin_mask(32, 32, Mask(32, 32, 1), cfg, rng);
        CHECK(m.mask.count() >= 32 * 32 - 1);
    }
    SUBCASE("always a subset of the foreground") {
        for (int i = 0; i < 50; ++i) {
            const auto fg = random_mask(32, 32, rng);
            const auto m = perlin_mask(32, 32, fg, cfg, rng);
            for (std::size_t k = 0; k < fg.bits.size(); ++k)
                if (m.mask.bits[k]) CHECK(fg.bits[k]);
        }
    }
}

TEST_CASE("texture patches") {
    Rng rng(10);
    for (auto fam : TextureConfig{}.bank) {
        const auto gray = texture_patch(24, 16, fam, true, rng);
        CHECK(gray.height == 24);
        CHECK(gray.width == 16);
        for (std::size_t p = 0; p < gray.pixel_count(); ++p) {
            CHECK(gray.data[3 * p] == gray.data[3 * p + 1]);
            CHECK(gray.data[3 * p] == gray.data[3 * p + 2]);
        }
        for (double v : texture_patch(16, 16, fam, false, rng).data) CHECK((v >= 0.0 && v <= 1.0));
        Rng a(3), b(3);
        CHECK(texture_patch(8, 8, fam, false, a).data == texture_patch(8, 8, fam, false, b).data);
    }
    CHECK(texture_family_from_string(to_string(TextureFamily::cellular)) == TextureFamily::cellular);
    CHECK_THROWS_AS(texture_family_from_string("plaid"), ArgumentError);
}

TEST_CASE("blend_texture") {
    Rng rng(11);
    const auto x = random_image(9, 7, rng);
    const auto t = random_image(9, 7, rng);
    const auto m = random_mask(9, 7, rng);
    CHECK(blend_texture(x, t, m, 1.0).data == x.data);
    CHECK(blend_texture(x, t, Mask(9, 7), 0.3).data == x.data);
    CHECK(blend_texture(x, x, m, 0.37).data == x.data);

    for (int i = 0; i < 1000; ++i) {
        const double beta = uniform01(rng);
        const auto out = blend_texture(x, t, m, beta);
        for (std::size_t p = 0; p < x.pixel_count(); ++p)
            if (!m.bits[p])
                for (int c = 0; c < 3; ++c) REQUIRE(out.data[3 * p + c] == x.data[3 * p + c]);
    }

    ImageRGB px(1, 1, 0.4), pt(1, 1, 0.8);
    CHECK(blend_texture(px, pt, Mask(1, 1, 1), 0.25).data[0] == doctest::Approx(0.7).epsilon(1e-15));
    CHECK_THROWS_AS(blend_texture(px, pt, Mask(1, 1, 1), 1.5), ArgumentError);
}

TEST_CASE("beta draws stay in the truncation interval") {
    TextureConfig cfg;
    Rng rng(12);
    double sum = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double b = sample_beta(cfg, rng);
        REQUIRE(b > 0.2);
        REQUIRE(b < 0.8);
        sum += b;
    }
    CHECK(std::abs(sum / n - 0.5) <= 0.01);
}

TEST_CASE("texture anomaly sample") {
    const auto prepared = preprocess::prepare(fixture::synthetic_bundle(32, 1));
    TextureConfig cfg;
    int seen_rgb_only = 0, seen_both = 0;
    for (std::uint64_t s = 0; s < 60; ++s) {
        Rng rng(s);
        const auto u = make_utag_sample(prepared, cfg, rng);
        for (std::size_t k = 0; k < u.m_t.bits.size(); ++k)
            if (u.m_t.bits[k]) REQUIRE(prepared.foreground.bits[k]);
        CHECK((u.beta > 0.2 && u.beta < 0.8));
        if (u.choice == ModalityChoice::rgb_only) {
            ++seen_rgb_only;
            CHECK(u.x_plus_depth.data == prepared.depth.data);
        }
        if (u.choice == ModalityChoice::depth_only) CHECK(u.x_plus_rgb.data == prepared.rgb.data);
        if (u.choice == ModalityChoice::both) {
            ++seen_both;
            for (std::size_t p = 0; p < prepared.rgb.pixel_count(); ++p) {
                if (u.m_t.bits[p]) continue;
                for (int c = 0; c < 3; ++c) {
                    REQUIRE(u.x_plus_rgb.data[3 * p + c] == prepared.rgb.data[3 * p + c]);
                    REQUIRE(u.x_plus_depth.data[3 * p + c] == prepared.depth.data[3 * p + c]);
                }
            }
        }
        // The depth image carries a grayscale texture, so it stays gray.
        for (std::size_t p = 0; p < u.x_plus_depth.pixel_count(); ++p)
            REQUIRE(u.x_plus_depth.data[3 * p] == u.x_plus_depth.data[3 * p + 1]);
    }
    CHECK(seen_rgb_only > 0);
    CHECK(seen_both > 0);
}

TEST_CASE("gaussian anomaly sample") {
    const auto m = fixture::tiny_model();
    const features::FrozenBackbone bb(m.backbone_seed, m.backbone);
    const auto prepared = preprocess::prepare(fixture::synthetic_bundle(16, 2));
    const auto clean = clean_multiscale(prepared, bb, m.patch_size);
    const auto adaptor = features::make_adaptor(m.concat_channels(), m.fused_channels, 4, 0.1);
    const auto d_clean = features::fuse(clean.rgb, clean.depth, adaptor);

    SUBCASE("tiny sigmas reproduce the clean fused map") {
        NoiseConfig cfg{1e-12, 1e-12, 1e-12, 1.0 / 3.0, {true, true, true}};
        Rng rng(1);
        const auto g = make_mgag_sample(prepared, clean, bb, m.patch_size, adaptor, cfg, rng);
        REQUIRE(g.d_g1);
        REQUIRE(g.d_g2);
        REQUIRE(g.d_g3);
        CHECK((g.d_g1->values - d_clean.values).cwiseAbs().maxCoeff() <= 1e-6);
        CHECK((g.d_g2->values - d_clean.values).cwiseAbs().maxCoeff() <= 1e-6);
        CHECK((g.d_g3->values - d_clean.values).cwiseAbs().maxCoeff() <= 1e-6);
        CHECK(g.g3_choice == ModalityChoice::both);
    }
    SUBCASE("disabled stages stay empty and the fused stage is never modality-selected") {
        NoiseConfig cfg;
        cfg.stages = {false, true, true};
        for (std::uint64_t s = 0; s < 20; ++s) {
            Rng rng(s);
            const auto g = make_mgag_sample(prepared, clean, bb, m.patch_size, adaptor, cfg, rng);
            CHECK_FALSE(g.x_minus.has_value());
            CHECK_FALSE(g.d_g1.has_value());
            CHECK(g.s_minus.has_value());
            CHECK(g.g3_choice == ModalityChoice::both);
        }
    }
    SUBCASE("deterministic given the rng state") {
        Rng a(5), b(5);
        const auto g1 = make_mgag_sample(prepared, clean, bb, m.patch_size, adaptor, NoiseConfig{}, a);
        const auto g2 = make_mgag_sample(prepared, clean, bb, m.patch_size, adaptor, NoiseConfig{}, b);
        CHECK(g1.d_g1->values == g2.d_g1->values);
        CHECK(g1.d_g2->values == g2.d_g2->values);
        CHECK(*g1.eps_d == *g2.eps_d);
    }
}
