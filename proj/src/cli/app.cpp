#include "dmad/cli/app.hpp"

#include "dmad/cli/experiment.hpp"
#include "dmad/cli/run_config.hpp"
#include "dmad/core/error.hpp"
#include "dmad/dataio/heatmap.hpp"
#include "dmad/dataio/sample_io.hpp"
#include "dmad/dataio/synthetic.hpp"
#include "dmad/features/adaptor.hpp"
#include "dmad/features/stats.hpp"
#include "dmad/inference/scoring.hpp"
#include "dmad/metrics/metrics.hpp"
#include "dmad/anomaly/generators.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

namespace dmad::cli {

namespace fs = std::filesystem;

namespace {

struct GlobalFlags {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> config;
    std::optional<std::string> out;
    bool dump_config = false;
};

// Flag values that override the config file when given.
struct Overrides {
    std::optional<std::string> data;
    std::vector<std::string> classes;
    std::optional<int> num_classes, image_size, train_count, test_count;
    std::optional<double> anomalous_fraction;
    std::optional<int> epochs, batch_size, shots, replicate;
    std::optional<double> lr_adaptor, lr_disc, alpha, fpr_limit, sigma_smooth;
    std::vector<double> sigma;
    std::optional<std::string> stages;
    bool no_mgag = false, no_utag = false;
};

RunConfig resolve(const GlobalFlags& g, const Overrides& o) {
    RunConfig c = g.config ? load_run_config(*g.config) : RunConfig{};
    if (g.seed) c.seed = *g.seed;
    if (g.out) c.out = *g.out;
    if (o.data) c.data_root = *o.data;
    if (!o.classes.empty()) c.classes = o.classes;
    if (o.num_classes) c.synth.num_classes = *o.num_classes;
    if (o.image_size) c.synth.image_size = *o.image_size;
    if (o.train_count) c.synth.train_per_class = *o.train_count;
    if (o.test_count) c.synth.test_per_class = *o.test_count;
    if (o.anomalous_fraction) c.synth.anomalous_fraction = *o.anomalous_fraction;
    auto& t = c.train;
    if (o.epochs) t.epochs = *o.epochs;
    if (o.batch_size) t.batch_size = *o.batch_size;
    if (o.shots) t.shots = *o.shots;
    if (o.replicate) t.replicate = *o.replicate;
    if (o.lr_adaptor) t.lr_adaptor = *o.lr_adaptor;
    if (o.lr_disc) t.lr_disc = *o.lr_disc;
    if (o.alpha) t.noise.alpha = t.texture.alpha = *o.alpha;
    if (o.fpr_limit) c.fpr_limit = *o.fpr_limit;
    if (o.sigma_smooth) c.model.sigma_smooth = *o.sigma_smooth;
    if (!o.sigma.empty()) {
        t.noise.sigma1 = o.sigma[0];
        t.noise.sigma2 = o.sigma[1];
        t.noise.sigma3 = o.sigma[2];
    }
    if (o.stages) {
        if (o.stages->size() != 3 || o.stages->find_first_not_of("01") != std::string::npos) {
            throw ArgumentError("--stages expects three 0/1 digits, e.g. 111");
        }
        for (std::size_t k = 0; k < 3; ++k) t.noise.stages[k] = (*o.stages)[k] == '1';
    }
    if (o.no_mgag) t.mix.use_mgag = false;
    if (o.no_utag) t.mix.use_utag = false;
    t.seed = c.seed;
    c.validate();
    return c;
}

std::vector<std::string> class_list(const RunConfig& c, const dataio::DatasetManifest& m) {
    if (!c.classes.empty()) {
        for (const auto& name : c.classes) (void)m.find(name);
        return c.classes;
    }
    std::vector<std::string> all;
    for (const auto& e : m.classes) all.push_back(e.class_name);
    return all;
}

std::size_t class_index(const dataio::DatasetManifest& m, const std::string& name) {
    for (std::size_t i = 0; i < m.classes.size(); ++i) {
        if (m.classes[i].class_name == name) return i;
    }
    throw ArgumentError("unknown class " + name);
}

fs::path checkpoint_path(const fs::path& model_dir, const std::string& class_name) {
    return model_dir / class_name / "model.badm";
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot write " + path.string());
    os << text;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

int cmd_gen(const RunConfig& c) {
    const auto m = dataio::generate_synthetic_dataset(c.synth, c.seed, c.out);
    std::size_t train = 0, test = 0;
    for (const auto& e : m.classes) {
        train += e.train.size();
        test += e.test.size();
    }
    std::printf("wrote %zu classes (%zu train, %zu test samples) to %s\n", m.classes.size(), train, test,
                c.out.string().c_str());
    return kOk;
}

int cmd_train(const RunConfig& c) {
    const auto m = dataio::load_manifest(c.data_root);
    const features::FrozenBackbone bb(c.model.backbone_seed, c.model.backbone);
    ensure_dir(c.out);
    write_text(c.out / "config.json", to_json(c).dump(2) + "\n");
    for (const auto& name : class_list(c, m)) {
        auto t = c.train;
        t.seed = class_train_seed(c.seed, class_index(m, name));
        const auto result = discriminator::train(m, name, bb, c.model, t, [&](int e, const discriminator::LossBreakdown& l) {
            std::fprintf(stderr, "%s epoch %d/%d total %.5f\n", name.c_str(), e + 1, t.epochs, l.total);
        });
        const fs::path dir = c.out / name;
        ensure_dir(dir);
        discriminator::save_checkpoint({c.model, result.state}, dir / "model.badm");
        discriminator::write_loss_log(result.epoch_log, dir / "loss.csv");
        std::string ids;
        for (const auto& id : result.train_ids) ids += id + "\n";
        write_text(dir / "train_ids.txt", ids);
        std::printf("%s: %d epochs, %zu training samples, final loss %.5f -> %s\n", name.c_str(), t.epochs,
                    result.train_ids.size(), result.epoch_log.back().total, (dir / "model.badm").string().c_str());
    }
    return kOk;
}

int cmd_infer(const RunConfig& c, const fs::path& model_dir, const std::string& split,
              const std::vector<std::string>& samples) {
    if (split != "train" && split != "test") throw ArgumentError("--split must be train or test");
    const auto m = dataio::load_manifest(c.data_root);
    for (const auto& name : class_list(c, m)) {
        const auto ckpt = discriminator::load_checkpoint(checkpoint_path(model_dir, name));
        const features::FrozenBackbone bb(ckpt.config.backbone_seed, ckpt.config.backbone);
        const auto& entry = m.find(name);
        const auto& rels = split == "train" ? entry.train : entry.test;
        const fs::path dir = c.out / name;
        ensure_dir(dir);
        int scored = 0;
        for (const auto& rel : rels) {
            const auto id = fs::path(rel).filename().string();
            if (!samples.empty() && std::find(samples.begin(), samples.end(), id) == samples.end()) continue;
            const auto bundle = dataio::load_sample(m.resolve(rel));
            const auto s = inference::score_sample(bundle, ckpt, bb);
            inference::write_score(s, bundle.sample_id, dir / bundle.sample_id);
            dataio::save_heatmap(s.pixel_scores, dir / (bundle.sample_id + ".png"));
            std::printf("%s/%s %.6f\n", name.c_str(), bundle.sample_id.c_str(), s.image_score);
            ++scored;
        }
        if (scored == 0) throw ArgumentError("no matching samples in class " + name);
    }
    return kOk;
}

int cmd_eval(const RunConfig& c, const fs::path& model_dir) {
    const auto m = dataio::load_manifest(c.data_root);
    std::vector<metrics::EvalReport> reports;
    for (const auto& name : class_list(c, m)) {
        const auto ckpt = discriminator::load_checkpoint(checkpoint_path(model_dir, name));
        const features::FrozenBackbone bb(ckpt.config.backbone_seed, ckpt.config.backbone);
        reports.push_back(metrics::evaluate(m, name, ckpt, bb, c.fpr_limit).report);
    }
    std::fputs(metrics::format_table(reports).c_str(), stdout);
    ensure_dir(c.out);
    auto report = metrics::aggregate_json(reports);
    report["fpr_limit"] = c.fpr_limit;
    write_text(c.out / "report.json", report.dump(2) + "\n");
    return kOk;
}

int cmd_stats(const RunConfig& c, const std::string& stage, const std::string& split,
              const std::optional<std::string>& model_dir) {
    if (split != "train" && split != "test") throw ArgumentError("--split must be train or test");
    if (stage != "rgb" && stage != "depth" && stage != "concat" && stage != "fused") {
        throw ArgumentError("--stage must be rgb, depth, concat or fused");
    }
    if (stage == "fused" && !model_dir) throw ArgumentError("--stage fused needs --model");
    const auto m = dataio::load_manifest(c.data_root);
    ensure_dir(c.out);
    for (const auto& name : class_list(c, m)) {
        discriminator::ModelConfig mcfg = c.model;
        std::optional<discriminator::Checkpoint> ckpt;
        if (model_dir) {
            ckpt = discriminator::load_checkpoint(checkpoint_path(*model_dir, name));
            mcfg = ckpt->config;
        }
        const features::FrozenBackbone bb(mcfg.backbone_seed, mcfg.backbone);
        const auto& entry = m.find(name);
        std::vector<features::FeatureMap> maps;
        for (const auto& rel : split == "train" ? entry.train : entry.test) {
            const auto prepared = preprocess::prepare(dataio::load_sample(m.resolve(rel)), mcfg.preprocess);
            auto s = anomaly::clean_multiscale(prepared, bb, mcfg.patch_size);
            if (stage == "rgb") {
                maps.push_back(std::move(s.rgb));
            } else if (stage == "depth") {
                maps.push_back(std::move(s.depth));
            } else if (stage == "concat") {
                maps.push_back(features::concat_modalities(s.rgb, s.depth));
            } else {
                maps.push_back(features::fuse(s.rgb, s.depth, ckpt->state.adaptor));
            }
        }
        const fs::path path = c.out / ("feature_stats_" + name + "_" + stage + ".csv");
        features::emit_feature_stats(maps, path);
        std::printf("%s\n", path.string().c_str());
    }
    return kOk;
}

int cmd_ablate(const RunConfig& c, const std::string& sweep, int seeds) {
    if (seeds < 1) throw ArgumentError("--seeds must be >= 1");
    const auto cells = ablation_grid(sweep, c.train);
    ensure_dir(c.out);
    fs::path data = c.data_root;
    if (!fs::exists(data / "manifest.json")) {
        data = c.out / "data";
        std::fprintf(stderr, "no dataset at %s; generating one in %s\n", c.data_root.string().c_str(), data.string().c_str());
        dataio::generate_synthetic_dataset(c.synth, c.seed, data);
    }
    const auto m = dataio::load_manifest(data);
    const auto classes = class_list(c, m);

    const fs::path csv_path = c.out / ("ablate_" + sweep + ".csv");
    std::FILE* csv = std::fopen(csv_path.string().c_str(), "w");
    if (!csv) throw IoError("cannot write " + csv_path.string());
    std::fprintf(csv, "sweep,config,seed,use_mgag,use_utag,g1,g2,g3,sigma1,sigma2,sigma3,alpha,i_auroc,p_auroc,p_aupro\n");
    for (const auto& cell : cells) {
        for (int s = 0; s < seeds; ++s) {
            auto t = cell.train;
            t.seed = c.seed + static_cast<std::uint64_t>(s);
            const auto r = run_benchmark(m, classes, c.model, t, c.fpr_limit);
            const auto& n = t.noise;
            std::fprintf(csv, "%s,%s,%llu,%d,%d,%d,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", sweep.c_str(),
                         cell.label.c_str(), static_cast<unsigned long long>(t.seed), t.mix.use_mgag, t.mix.use_utag,
                         n.stages[0], n.stages[1], n.stages[2], n.sigma1, n.sigma2, n.sigma3, n.alpha, r.mean.i_auroc,
                         r.mean.p_auroc, r.mean.p_aupro);
            std::fflush(csv);
            std::printf("%-22s seed %llu  I-AUROC %.4f  P-AUROC %.4f  P-AUPRO %.4f  (%.0f s)\n", cell.label.c_str(),
                        static_cast<unsigned long long>(t.seed), r.mean.i_auroc, r.mean.p_auroc, r.mean.p_aupro, r.seconds);
            std::fflush(stdout);
        }
    }
    std::fclose(csv);
    return kOk;
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Dual-modal (RGB + depth) anomaly detection with synthetic anomaly training"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalFlags g;
    app.add_option("--seed", g.seed, "Root seed for every random draw");
    app.add_option("--config", g.config, "JSON run config; flags override its values")->check(CLI::ExistingFile);
    app.add_option("--out", g.out, "Output directory (dataset root for gen)");
    app.add_flag("--dump-config", g.dump_config, "Print the resolved config as JSON and exit");

    Overrides o;
    const auto add_data = [&](CLI::App* s) { s->add_option("--data", o.data, "Dataset root containing manifest.json"); };
    const auto add_class = [&](CLI::App* s) {
        s->add_option("--class", o.classes, "Class to process (repeatable; default: all)");
    };

    auto* gen = app.add_subcommand("gen", "Generate the synthetic RGB + depth dataset");
    gen->add_option("--classes", o.num_classes, "Number of object classes");
    gen->add_option("--image-size", o.image_size, "Image side length in pixels");
    gen->add_option("--train", o.train_count, "Normal training samples per class");
    gen->add_option("--test", o.test_count, "Test samples per class");
    gen->add_option("--anomalous-fraction", o.anomalous_fraction, "Fraction of anomalous test samples");

    const auto add_train_opts = [&](CLI::App* s) {
        s->add_option("--epochs", o.epochs, "Training epochs");
        s->add_option("--batch-size", o.batch_size, "Samples per optimizer step");
        s->add_option("--lr-adaptor", o.lr_adaptor, "Adaptor learning rate");
        s->add_option("--lr-disc", o.lr_disc, "Discriminator learning rate");
        s->add_option("--sigma", o.sigma, "Gaussian noise scales of G1 G2 G3")->expected(3);
        s->add_option("--stages", o.stages, "Enabled Gaussian stages as three 0/1 digits, e.g. 011");
        s->add_option("--alpha", o.alpha, "Selective-modality probability for each single modality");
        s->add_flag("--no-mgag", o.no_mgag, "Disable the Gaussian anomaly generator");
        s->add_flag("--no-utag", o.no_utag, "Disable the texture anomaly generator");
    };

    auto* train = app.add_subcommand("train", "Train one model per class");
    add_data(train);
    add_class(train);
    add_train_opts(train);
    train->add_option("--shots", o.shots, "Few-shot mode: train on k randomly chosen samples");
    train->add_option("--replicate", o.replicate, "Few-shot replication factor (default ceil(train/k))");
    train->add_option("--sigma-smooth", o.sigma_smooth, "Score-map smoothing sigma stored in the checkpoint");

    std::string model_dir = "model";
    std::string split = "test";
    std::vector<std::string> sample_ids;
    auto* infer = app.add_subcommand("infer", "Score samples and write score maps and heatmaps");
    add_data(infer);
    add_class(infer);
    infer->add_option("--model", model_dir, "Directory with <class>/model.badm from train")->capture_default_str();
    infer->add_option("--split", split, "Split to score: train or test")->capture_default_str();
    infer->add_option("--sample", sample_ids, "Sample id to score (repeatable; default: whole split)");

    auto* eval = app.add_subcommand("eval", "Compute I-AUROC, P-AUROC and P-AUPRO on the test split");
    add_data(eval);
    add_class(eval);
    eval->add_option("--model", model_dir, "Directory with <class>/model.badm from train")->capture_default_str();
    eval->add_option("--fpr-limit", o.fpr_limit, "FPR integration limit for P-AUPRO");

    std::string stage = "concat";
    std::optional<std::string> stats_model;
    std::string stats_split = "train";
    auto* stats = app.add_subcommand("stats", "Write per-channel feature standard deviations (CSV)");
    add_data(stats);
    add_class(stats);
    stats->add_option("--stage", stage, "Feature stage: rgb, depth, concat or fused")->capture_default_str();
    stats->add_option("--model", stats_model, "Model directory (required for --stage fused)");
    stats->add_option("--split", stats_split, "Split to read: train or test")->capture_default_str();

    std::string sweep;
    int seeds = 1;
    auto* ablate = app.add_subcommand("ablate", "Run an ablation sweep and write one CSV row per config and seed");
    ablate->add_option("sweep", sweep, "generators, placement or noise-scales")->required();
    add_data(ablate);
    add_class(ablate);
    add_train_opts(ablate);
    ablate->add_option("--seeds", seeds, "Seeds per configuration (seed, seed+1, ...)")->capture_default_str();
    ablate->add_option("--fpr-limit", o.fpr_limit, "FPR integration limit for P-AUPRO");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUserError;
    }

    try {
        const RunConfig c = resolve(g, o);
        if (g.dump_config) {
            std::cout << to_json(c).dump(2) << '\n';
            return kOk;
        }
        if (*gen) return cmd_gen(c);
        if (*train) return cmd_train(c);
        if (*infer) return cmd_infer(c, model_dir, split, sample_ids);
        if (*eval) return cmd_eval(c, model_dir);
        if (*stats) return cmd_stats(c, stage, stats_split, stats_model);
        if (*ablate) return cmd_ablate(c, sweep, seeds);
        return kUserError;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kUserError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return kInternalError;
    }
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace dmad::cli
