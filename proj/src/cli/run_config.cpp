#include "dmad/cli/run_config.hpp"

#include "dmad/core/error.hpp"
#include "dmad/discriminator/checkpoint.hpp"

#include <fstream>

namespace dmad::cli {

using nlohmann::json;

namespace {

template <typename T>
void get_if(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw FormatError(std::string("config key '") + key + "': " + e.what());
    }
}

const json* section(const json& j, const char* key) {
    if (!j.contains(key)) return nullptr;
    const auto& s = j.at(key);
    if (!s.is_object()) throw FormatError(std::string("config section '") + key + "' must be an object");
    return &s;
}

}  // namespace

void RunConfig::validate() const {
    if (synth.image_size <= 0) throw ArgumentError("image size must be positive");
    for (const auto& l : model.backbone.layers) {
        if (synth.image_size % l.stride != 0) {
            throw ArgumentError("image size " + std::to_string(synth.image_size) + " is not divisible by stride " +
                                std::to_string(l.stride));
        }
    }
    if (model.patch_size < 1 || model.patch_size % 2 == 0) throw ArgumentError("patch size must be odd and positive");
    if (model.fused_channels < 1 || model.hidden < 1) throw ArgumentError("fused and hidden widths must be positive");
    if (model.sigma_smooth < 0) throw ArgumentError("sigma_smooth must be >= 0");
    if (!(fpr_limit > 0 && fpr_limit <= 1)) throw ArgumentError("fpr_limit must lie in (0, 1]");
    train.validate();
}

json to_json(const anomaly::NoiseConfig& c) {
    return {{"sigma", {c.sigma1, c.sigma2, c.sigma3}},
            {"stages", {c.stages[0], c.stages[1], c.stages[2]}},
            {"alpha", c.alpha}};
}

json to_json(const anomaly::TextureConfig& c) {
    json bank = json::array();
    for (auto f : c.bank) bank.push_back(anomaly::to_string(f));
    return {{"beta_mean", c.beta_mean},
            {"beta_std", c.beta_std},
            {"beta_lo", c.beta_lo},
            {"beta_hi", c.beta_hi},
            {"threshold", c.threshold},
            {"max_resolution_exp", c.max_resolution_exp},
            {"max_mask_retries", c.max_mask_retries},
            {"alpha", c.alpha},
            {"bank", bank}};
}

json to_json(const RunConfig& c) {
    json families = json::array();
    for (auto f : c.synth.families) families.push_back(dataio::to_string(f));
    const auto& t = c.train;
    json train = {{"epochs", t.epochs},
                  {"batch_size", t.batch_size},
                  {"lr_adaptor", t.lr_adaptor},
                  {"lr_disc", t.lr_disc},
                  {"adam_beta1", t.adam.beta1},
                  {"adam_beta2", t.adam.beta2},
                  {"adam_eps", t.adam.eps},
                  {"use_mgag", t.mix.use_mgag},
                  {"use_utag", t.mix.use_utag},
                  {"focal_gamma", t.focal_gamma},
                  {"focal_alpha", t.focal_alpha},
                  {"shots", t.shots ? json(*t.shots) : json(nullptr)},
                  {"replicate", t.replicate ? json(*t.replicate) : json(nullptr)}};
    return {{"seed", c.seed},
            {"out", c.out.string()},
            {"data_root", c.data_root.string()},
            {"classes", c.classes},
            {"synth",
             {{"image_size", c.synth.image_size},
              {"num_classes", c.synth.num_classes},
              {"train_per_class", c.synth.train_per_class},
              {"test_per_class", c.synth.test_per_class},
              {"anomalous_fraction", c.synth.anomalous_fraction},
              {"families", families},
              {"pixel_noise", c.synth.pixel_noise},
              {"max_jitter", c.synth.max_jitter},
              {"invalid_fraction", c.synth.invalid_fraction}}},
            {"model", discriminator::to_json(c.model)},
            {"noise", to_json(t.noise)},
            {"texture", to_json(t.texture)},
            {"train", train},
            {"fpr_limit", c.fpr_limit}};
}

void apply_json(const json& j, RunConfig& c) {
    if (!j.is_object()) throw FormatError("config must be a JSON object");
    get_if(j, "seed", c.seed);
    std::string path;
    if (j.contains("out")) {
        get_if(j, "out", path);
        c.out = path;
    }
    if (j.contains("data_root")) {
        get_if(j, "data_root", path);
        c.data_root = path;
    }
    get_if(j, "classes", c.classes);
    get_if(j, "fpr_limit", c.fpr_limit);

    if (const json* s = section(j, "synth")) {
        get_if(*s, "image_size", c.synth.image_size);
        get_if(*s, "num_classes", c.synth.num_classes);
        get_if(*s, "train_per_class", c.synth.train_per_class);
        get_if(*s, "test_per_class", c.synth.test_per_class);
        get_if(*s, "anomalous_fraction", c.synth.anomalous_fraction);
        get_if(*s, "pixel_noise", c.synth.pixel_noise);
        get_if(*s, "max_jitter", c.synth.max_jitter);
        get_if(*s, "invalid_fraction", c.synth.invalid_fraction);
        if (s->contains("families")) {
            std::vector<std::string> names;
            get_if(*s, "families", names);
            c.synth.families.clear();
            for (const auto& n : names) c.synth.families.push_back(dataio::defect_family_from_string(n));
        }
    }
    if (const json* s = section(j, "model")) {
        // Start from the current model config so partial sections merge.
        json merged = discriminator::to_json(c.model);
        merged.update(*s);
        c.model = discriminator::model_config_from_json(merged);
    }
    if (const json* s = section(j, "noise")) {
        auto& n = c.train.noise;
        if (s->contains("sigma")) {
            std::vector<Real> sig;
            get_if(*s, "sigma", sig);
            if (sig.size() != 3) throw FormatError("noise.sigma must have three entries");
            n.sigma1 = sig[0];
            n.sigma2 = sig[1];
            n.sigma3 = sig[2];
        }
        if (s->contains("stages")) {
            std::vector<bool> st;
            get_if(*s, "stages", st);
            if (st.size() != 3) throw FormatError("noise.stages must have three entries");
            n.stages = {st[0], st[1], st[2]};
        }
        get_if(*s, "alpha", n.alpha);
    }
    if (const json* s = section(j, "texture")) {
        auto& t = c.train.texture;
        get_if(*s, "beta_mean", t.beta_mean);
        get_if(*s, "beta_std", t.beta_std);
        get_if(*s, "beta_lo", t.beta_lo);
        get_if(*s, "beta_hi", t.beta_hi);
        get_if(*s, "threshold", t.threshold);
        get_if(*s, "max_resolution_exp", t.max_resolution_exp);
        get_if(*s, "max_mask_retries", t.max_mask_retries);
        get_if(*s, "alpha", t.alpha);
        if (s->contains("bank")) {
            std::vector<std::string> names;
            get_if(*s, "bank", names);
            t.bank.clear();
            for (const auto& n : names) t.bank.push_back(anomaly::texture_family_from_string(n));
        }
    }
    if (const json* s = section(j, "train")) {
        auto& t = c.train;
        get_if(*s, "epochs", t.epochs);
        get_if(*s, "batch_size", t.batch_size);
        get_if(*s, "lr_adaptor", t.lr_adaptor);
        get_if(*s, "lr_disc", t.lr_disc);
        get_if(*s, "adam_beta1", t.adam.beta1);
        get_if(*s, "adam_beta2", t.adam.beta2);
        get_if(*s, "adam_eps", t.adam.eps);
        get_if(*s, "use_mgag", t.mix.use_mgag);
        get_if(*s, "use_utag", t.mix.use_utag);
        get_if(*s, "focal_gamma", t.focal_gamma);
        get_if(*s, "focal_alpha", t.focal_alpha);
        for (auto [key, field] : {std::pair{"shots", &t.shots}, std::pair{"replicate", &t.replicate}}) {
            if (!s->contains(key)) continue;
            if (s->at(key).is_null()) {
                field->reset();
            } else {
                int v = 0;
                get_if(*s, key, v);
                *field = v;
            }
        }
    }
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config " + path.string());
    RunConfig c;
    try {
        apply_json(json::parse(is), c);
    } catch (const json::parse_error& e) {
        throw FormatError("config " + path.string() + ": " + e.what());
    }
    return c;
}

}  // namespace dmad::cli
