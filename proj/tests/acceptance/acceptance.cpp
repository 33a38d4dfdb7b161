// Acceptance run: prints one PASS/FAIL line per criterion.
//
//   dmad_acceptance            all criteria
//   dmad_acceptance 4 5 7      a subset
//
// Progress goes to stderr; the verdict lines go to stdout.

#include "support/fixtures.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

#include "dmad/anomaly/gaussian.hpp"
#include "dmad/anomaly/texture.hpp"
#include "dmad/cli/app.hpp"
#include "dmad/cli/experiment.hpp"
#include "dmad/dataio/synthetic.hpp"
#include "dmad/features/backbone.hpp"
#include "dmad/inference/scoring.hpp"
#include "dmad/metrics/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <string>

#include <fcntl.h>
#include <unistd.h>

using namespace dmad;
namespace fs = std::filesystem;

namespace {

constexpr int kEpochs = 40;
constexpr std::uint64_t kDataSeed = 7;
const std::array<std::uint64_t, 3> kSeeds{1, 2, 3};

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// ---------------------------------------------------------------------------
// Benchmark runs, cached by (config label, seed).

struct Bench {
    fixture::TempDir dir{"acceptance"};
    std::optional<dataio::DatasetManifest> manifest;
    std::map<std::pair<std::string, std::uint64_t>, cli::BenchmarkResult> cache;

    const dataio::DatasetManifest& data() {
        if (!manifest) {
            std::fprintf(stderr, "generating benchmark dataset (3 x 50/30, 64x64)\n");
            manifest = dataio::generate_synthetic_dataset(dataio::SynthConfig{}, kDataSeed, dir.path() / "data");
        }
        return *manifest;
    }

    const cli::BenchmarkResult& run(const std::string& label, const discriminator::TrainConfig& base, std::uint64_t seed) {
        const auto key = std::make_pair(label, seed);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
        discriminator::TrainConfig t = base;
        t.epochs = kEpochs;
        t.seed = seed;
        std::fprintf(stderr, "  training %-12s seed %llu ...", label.c_str(), static_cast<unsigned long long>(seed));
        std::fflush(stderr);
        auto r = cli::run_benchmark(data(), {}, discriminator::ModelConfig{}, t, 0.3);
        std::fprintf(stderr, " I=%.4f P=%.4f PRO=%.4f (%.0fs)\n", r.mean.i_auroc, r.mean.p_auroc, r.mean.p_aupro, r.seconds);
        return cache.emplace(key, std::move(r)).first->second;
    }

    double mean_i_auroc(const std::string& label, const discriminator::TrainConfig& base) {
        double s = 0;
        for (auto seed : kSeeds) s += run(label, base, seed).mean.i_auroc;
        return s / kSeeds.size();
    }
};

discriminator::TrainConfig default_train() { return {}; }

// ---------------------------------------------------------------------------

Verdict criterion1(Bench& b) {
    b.data();
    const std::clock_t c0 = std::clock();
    const auto& r = b.run("default", default_train(), kSeeds[0]);
    const double cpu_min = double(std::clock() - c0) / CLOCKS_PER_SEC / 60.0;
    double worst_ratio = 0;
    for (const auto& log : r.loss_logs) worst_ratio = std::max(worst_ratio, log.back().total / log.front().total);
    const bool pass = r.mean.i_auroc >= 0.90 && r.mean.p_auroc >= 0.90 && cpu_min <= 10.0;
    return {pass, fmt("mean I-AUROC %.4f, P-AUROC %.4f (P-AUPRO %.4f), %.2f CPU-min; loss final/first <= %.3f", r.mean.i_auroc,
                      r.mean.p_auroc, r.mean.p_aupro, cpu_min, worst_ratio)};
}

Verdict criterion2(Bench& b) {
    auto flat = default_train();
    flat.noise.sigma1 = flat.noise.sigma2 = flat.noise.sigma3 = 0.12;
    const double dec = b.mean_i_auroc("default", default_train());
    const double same = b.mean_i_auroc("sigma-flat", flat);
    return {dec > same, fmt("sigma (0.12,0.06,0.02) %.4f vs (0.12,0.12,0.12) %.4f", dec, same)};
}

Verdict criterion3(Bench& b) {
    auto utag = default_train();
    utag.mix.use_mgag = false;
    auto mgag = default_train();
    mgag.mix.use_utag = false;
    const double both = b.mean_i_auroc("default", default_train());
    const double u = b.mean_i_auroc("utag-only", utag);
    const double m = b.mean_i_auroc("mgag-only", mgag);
    return {both >= std::max(u, m) - 0.01, fmt("UTAG+MGAG %.4f, UTAG %.4f, MGAG %.4f", both, u, m)};
}

Verdict criterion4() {
    double worst = 0;
    std::size_t n = 0;
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto r = gradcheck::full_loss_check(seed);
        worst = std::max(worst, r.relative_error);
        n = r.parameters;
    }
    return {worst <= 1e-4, fmt("max relative error %.3e over 3 tapes (%zu parameters)", worst, n)};
}

Verdict criterion5() {
    Rng rng(5);
    double auroc_err = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = uniform_int(rng, 2, 64);
        std::vector<double> s(static_cast<std::size_t>(n));
        std::vector<std::uint8_t> y(static_cast<std::size_t>(n));
        const int levels = uniform_int(rng, 2, 20);
        for (auto& v : s) v = uniform_int(rng, 0, levels) / double(levels);
        for (auto& v : y) v = uniform01(rng) < 0.5;
        const int i = uniform_int(rng, 0, n - 1);
        const int j = (i + uniform_int(rng, 1, n - 1)) % n;
        y[static_cast<std::size_t>(i)] = 1;
        y[static_cast<std::size_t>(j)] = 0;
        auroc_err = std::max(auroc_err, std::abs(metrics::auroc(s, y) - oracle::pair_count_auroc(s, y)));
    }

    double aupro_err = 0;
    int done = 0;
    while (done < 100) {
        Field f(6, 6);
        Mask m(6, 6);
        const int levels = uniform_int(rng, 3, 40);
        for (auto& v : f.values) v = uniform_int(rng, 0, levels) / double(levels);
        const double density = uniform(rng, 0.05, 0.5);
        for (auto& bit : m.bits) bit = uniform01(rng) < density;
        if (m.count() == 0 || m.count() == 36) continue;
        aupro_err = std::max(aupro_err, std::abs(metrics::aupro({f}, {m}) - oracle::exhaustive_aupro({f}, {m}, 0.3)));
        ++done;
    }
    return {auroc_err <= 1e-12 && aupro_err <= 1e-9,
            fmt("auroc max error %.2e over 1000 instances; aupro max error %.2e over 100 maps", auroc_err, aupro_err)};
}

Verdict criterion6() {
    Rng rng(6);
    const auto f = anomaly::sample_gaussian_field(1000000, 0.12, rng);
    double sum = 0;
    for (double v : f) sum += v;
    const double mean = sum / f.size();
    double sq = 0;
    for (double v : f) sq += (v - mean) * (v - mean);
    const double sd = std::sqrt(sq / f.size());

    anomaly::TextureConfig tc;
    double lo = 1, hi = 0;
    for (int i = 0; i < 1000000; ++i) {
        const double b = anomaly::sample_beta(tc, rng);
        lo = std::min(lo, b);
        hi = std::max(hi, b);
    }

    std::array<int, 3> n{};
    for (int i = 0; i < 30000; ++i) ++n[static_cast<std::size_t>(anomaly::draw_modality(1.0 / 3.0, rng))];
    double worst = 0;
    for (int k : n) worst = std::max(worst, std::abs(k / 30000.0 - 1.0 / 3.0));

    const bool pass = std::abs(mean) <= 0.001 && std::abs(sd - 0.12) <= 0.002 && lo > 0.2 && hi < 0.8 && worst <= 0.02;
    return {pass, fmt("field mean %.2e std %.5f; beta in [%.6f, %.6f]; branch deviation %.4f", mean, sd, lo, hi, worst)};
}

Verdict criterion7() {
    Rng rng(7);
    std::vector<std::string> failed;
    const auto expect = [&](bool ok, const char* what) {
        if (!ok) failed.push_back(what);
    };

    for (int trial = 0; trial < 200; ++trial) {
        dataio::ImageRGB x(12, 10), t(12, 10);
        for (auto& v : x.data) v = uniform01(rng);
        for (auto& v : t.data) v = uniform01(rng);
        Mask m(12, 10);
        for (auto& bit : m.bits) bit = uniform01(rng) < 0.5;
        const double beta = uniform01(rng);
        expect(anomaly::blend_texture(x, t, m, 1.0).data == x.data, "blend beta=1");
        expect(anomaly::blend_texture(x, t, Mask(12, 10), beta).data == x.data, "blend empty mask");
        expect(anomaly::blend_texture(x, x, m, beta).data == x.data, "blend t=x");
    }

    for (int k : {0, 1, 2, 3, 4, 5}) {
        const int res = 1 << k;
        const Field p = anomaly::perlin_noise(64, 64, res, res, rng);
        bool zero = true;
        for (int i = 0; i < res; ++i)
            for (int j = 0; j < res; ++j) zero = zero && p.at(i * 64 / res, j * 64 / res) == 0.0;
        expect(zero, "perlin lattice zeros");
    }

    const features::FrozenBackbone bb(3);
    const auto img = fixture::synthetic_bundle(32, 4).rgb;
    for (int j : {2, 3}) {
        const auto v = features::extract_layer_features(img, bb, j);
        expect(features::aggregate_neighborhood(v, 1).values == v.values, "aggregate p=1");
    }

    for (int trial = 0; trial < 50; ++trial) {
        Field g(4, 4);
        for (auto& v : g.values) v = uniform01(rng);
        const Field up = inference::bilinear_upsample(g, 16, 16);
        expect(inference::gaussian_smooth(up, 0.0).values == up.values, "smoothing sigma=0");
        const auto s = inference::score_from_grid(g, 16, 16, uniform(rng, 0.0, 4.0));
        expect(s.image_score == *std::max_element(s.pixel_scores.values.begin(), s.pixel_scores.values.end()),
               "image score = max");
    }
    const auto mcfg = fixture::tiny_model();
    const features::FrozenBackbone tiny(mcfg.backbone_seed, mcfg.backbone);
    const discriminator::Checkpoint ck{mcfg, discriminator::init_model(mcfg, 1)};
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto sm = inference::score_sample(fixture::synthetic_bundle(16, s), ck, tiny);
        expect(sm.image_score == *std::max_element(sm.pixel_scores.values.begin(), sm.pixel_scores.values.end()),
               "score_sample max");
    }

    std::set<std::string> uniq(failed.begin(), failed.end());
    std::string detail = uniq.empty() ? "blend, perlin lattice, p=1, sigma=0 and max-rule identities hold" : "failed:";
    for (const auto& f : uniq) detail += " [" + f + "]";
    return {uniq.empty(), detail};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

bool same_tree(const fs::path& a, const fs::path& b, std::size_t& files) {
    std::set<fs::path> fa, fb;
    for (auto& e : fs::recursive_directory_iterator(a))
        if (e.is_regular_file()) fa.insert(fs::relative(e.path(), a));
    for (auto& e : fs::recursive_directory_iterator(b))
        if (e.is_regular_file()) fb.insert(fs::relative(e.path(), b));
    files = fa.size();
    if (fa != fb) return false;
    for (auto& rel : fa)
        if (slurp(a / rel) != slurp(b / rel)) return false;
    return true;
}

// Silences stdout (the CLI's progress lines) for its lifetime.
class MuteStdout {
public:
    MuteStdout() {
        std::fflush(stdout);
        saved_ = dup(STDOUT_FILENO);
        const int null = open("/dev/null", O_WRONLY);
        dup2(null, STDOUT_FILENO);
        close(null);
    }
    ~MuteStdout() {
        std::fflush(stdout);
        dup2(saved_, STDOUT_FILENO);
        close(saved_);
    }
    MuteStdout(const MuteStdout&) = delete;
    MuteStdout& operator=(const MuteStdout&) = delete;

private:
    int saved_;
};

Verdict criterion8() {
    fixture::TempDir tmp("determinism");
    const auto call = [](std::vector<std::string> args) {
        args.insert(args.begin(), "dmad");
        MuteStdout mute;
        return cli::run(args);
    };
    const auto gen = [&](const fs::path& out) {
        return call({"--seed", "7", "--out", out.string(), "gen", "--classes", "2", "--image-size", "32", "--train", "8",
                     "--test", "6"});
    };
    const auto train = [&](const fs::path& out) {
        return call({"--seed", "11", "--out", out.string(), "train", "--data", (tmp.path() / "d1").string(), "--epochs",
                     "3"});
    };
    if (gen(tmp.path() / "d1") || gen(tmp.path() / "d2")) return {false, "gen failed"};
    if (train(tmp.path() / "m1") || train(tmp.path() / "m2")) return {false, "train failed"};

    std::size_t data_files = 0;
    const bool data_same = same_tree(tmp.path() / "d1", tmp.path() / "d2", data_files);
    bool ckpt_same = true;
    for (const char* cls : {"cls0", "cls1"}) {
        const auto a = slurp(tmp.path() / "m1" / cls / "model.badm");
        ckpt_same = ckpt_same && !a.empty() && a == slurp(tmp.path() / "m2" / cls / "model.badm");
        ckpt_same = ckpt_same && slurp(tmp.path() / "m1" / cls / "loss.csv") == slurp(tmp.path() / "m2" / cls / "loss.csv");
    }
    return {data_same && ckpt_same, fmt("dataset trees %s (%zu files); checkpoints %s", data_same ? "identical" : "DIFFER",
                                        data_files, ckpt_same ? "identical" : "DIFFER")};
}

Verdict criterion9(Bench& b) {
    auto five = default_train();
    five.shots = 5;
    auto ten = default_train();
    ten.shots = 10;
    const double s5 = b.mean_i_auroc("5-shot", five);
    const double s10 = b.mean_i_auroc("10-shot", ten);
    const double full = b.mean_i_auroc("default", default_train());
    const bool pass = s10 - s5 >= -0.01 && full - s10 >= -0.01;
    return {pass, fmt("5-shot %.4f, 10-shot %.4f, full %.4f", s5, s10, full)};
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
    if (wanted.empty())
        for (int i = 1; i <= 9; ++i) wanted.insert(i);

    Bench bench;
    const std::map<int, std::pair<const char*, std::function<Verdict()>>> criteria{
        {1, {"synthetic benchmark", [&] { return criterion1(bench); }}},
        {2, {"noise-scale ablation direction", [&] { return criterion2(bench); }}},
        {3, {"generator combination direction", [&] { return criterion3(bench); }}},
        {4, {"full-parameter gradient", criterion4}},
        {5, {"metric oracles", criterion5}},
        {6, {"distributional checks", criterion6}},
        {7, {"algebraic identities", criterion7}},
        {8, {"determinism", criterion8}},
        {9, {"few-shot trend", [&] { return criterion9(bench); }}},
    };

    int failures = 0;
    for (int id : wanted) {
        const auto it = criteria.find(id);
        if (it == criteria.end()) {
            std::fprintf(stderr, "unknown criterion %d\n", id);
            return 2;
        }
        std::fprintf(stderr, "criterion %d: %s\n", id, it->second.first);
        Verdict v;
        try {
            v = it->second.second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failures += !v.pass;
        std::printf("[%s] criterion %d (%s): %s\n", v.pass ? "PASS" : "FAIL", id, it->second.first, v.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
