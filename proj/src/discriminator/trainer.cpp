#include "dmad/discriminator/trainer.hpp"

#include "dmad/core/error.hpp"
#include "dmad/core/rng.hpp"
#include "dmad/dataio/sample_io.hpp"

#include <algorithm>
#include <numeric>

namespace dmad::discriminator {

using anomaly::ModalityChoice;
using features::FeatureMap;

void TrainConfig::validate() const {
    if (epochs < 1) throw ArgumentError("epochs must be >= 1");
    if (batch_size < 1) throw ArgumentError("batch size must be >= 1");
    if (!(lr_adaptor >= 0) || !(lr_disc >= 0)) throw ArgumentError("learning rates must be non-negative");
    if (shots && *shots < 1) throw ArgumentError("shots must be >= 1");
    if (replicate && *replicate < 1) throw ArgumentError("replicate must be >= 1");
    if (!mix.use_mgag && !mix.use_utag) throw ArgumentError("at least one anomaly generator must be enabled");
    if (mix.use_mgag && noise.enabled_stages() == 0) throw ArgumentError("Gaussian generator has no enabled stage");
    if (mix.use_mgag) noise.validate();
    if (mix.use_utag) texture.validate();
}

TrainingSample make_training_sample(const dataio::SampleBundle& bundle, const features::FrozenBackbone& bb,
                                    const ModelConfig& cfg) {
    TrainingSample s;
    s.sample_id = bundle.sample_id;
    s.prepared = preprocess::prepare(bundle, cfg.preprocess);
    s.clean = anomaly::clean_multiscale(s.prepared, bb, cfg.patch_size);
    return s;
}

std::vector<std::uint8_t> downsample_mask(const Mask& m, int grid_h, int grid_w) {
    if (grid_h <= 0 || grid_w <= 0 || m.height % grid_h != 0 || m.width % grid_w != 0) {
        throw ShapeError("mask size is not a multiple of the feature grid");
    }
    const int ch = m.height / grid_h, cw = m.width / grid_w;
    std::vector<std::uint8_t> out(static_cast<std::size_t>(grid_h) * grid_w);
    for (int gy = 0; gy < grid_h; ++gy) {
        for (int gx = 0; gx < grid_w; ++gx) {
            int set = 0;
            for (int y = gy * ch; y < (gy + 1) * ch; ++y) {
                for (int x = gx * cw; x < (gx + 1) * cw; ++x) set += m.at(y, x);
            }
            out[static_cast<std::size_t>(gy) * grid_w + gx] = 2 * set >= ch * cw;
        }
    }
    return out;
}

BatchTape build_tape(std::span<const TrainingSample* const> batch, std::span<const std::uint64_t> sample_seeds,
                     const features::FrozenBackbone& bb, const ModelConfig& mcfg, const TrainConfig& tcfg,
                     const features::AdaptorParams& adaptor) {
    if (batch.empty()) throw ArgumentError("empty training batch");
    if (sample_seeds.size() != batch.size()) throw ArgumentError("one seed per batch sample required");

    BatchTape tape;
    tape.batch = static_cast<int>(batch.size());
    const FeatureMap& ref = batch.front()->clean.rgb;
    tape.positions = ref.positions();
    const int p = tape.positions;
    const int c_o = mcfg.concat_channels();
    const Eigen::Index rows = static_cast<Eigen::Index>(tape.batch) * p;

    tape.o_clean.resize(rows, c_o);
    const bool mgag = tcfg.mix.use_mgag;
    if (mgag) {
        for (int k = 0; k < 2; ++k) {
            if (tcfg.noise.stages[static_cast<std::size_t>(k)]) {
                tape.o_gauss.emplace_back(rows, c_o);
                tape.gauss_stage.push_back(k);
            }
        }
        if (tcfg.noise.stages[2]) tape.eps_d = RowMatrix(rows, adaptor.out_channels());
    }
    if (tcfg.mix.use_utag) tape.o_plus = RowMatrix(rows, c_o);

    for (std::size_t i = 0; i < batch.size(); ++i) {
        const TrainingSample& s = *batch[i];
        if (s.clean.rgb.positions() != p) throw ShapeError("training samples have different feature grids");
        const Eigen::Index r0 = static_cast<Eigen::Index>(i) * p;
        tape.o_clean.middleRows(r0, p) = features::concat_modalities(s.clean.rgb, s.clean.depth).values;

        if (mgag) {
            Rng rng = make_rng(sample_seeds[i], {1});
            const auto g = anomaly::make_mgag_sample(s.prepared, s.clean, bb, mcfg.patch_size, adaptor, tcfg.noise, rng, false);
            for (std::size_t k = 0; k < tape.gauss_stage.size(); ++k) {
                const auto& o = tape.gauss_stage[k] == 0 ? g.o_g1 : g.o_g2;
                tape.o_gauss[k].middleRows(r0, p) = o->values;
            }
            if (tcfg.noise.stages[0]) tape.g1_choices.push_back(g.g1_choice);
            if (tcfg.noise.stages[1]) tape.g2_choices.push_back(g.g2_choice);
            if (tape.eps_d) tape.eps_d->middleRows(r0, p) = *g.eps_d;
        }

        if (tcfg.mix.use_utag) {
            Rng rng = make_rng(sample_seeds[i], {2});
            const auto t = anomaly::make_utag_sample(s.prepared, tcfg.texture, rng);
            const FeatureMap s_rgb = t.choice == ModalityChoice::depth_only
                                         ? s.clean.rgb
                                         : features::build_multiscale(t.x_plus_rgb, bb, mcfg.patch_size);
            const FeatureMap s_depth = t.choice == ModalityChoice::rgb_only
                                           ? s.clean.depth
                                           : features::build_multiscale(t.x_plus_depth, bb, mcfg.patch_size);
            tape.o_plus->middleRows(r0, p) = features::concat_modalities(s_rgb, s_depth).values;
            const auto cells = downsample_mask(t.m_t, ref.height, ref.width);
            tape.texture_targets.insert(tape.texture_targets.end(), cells.begin(), cells.end());
            tape.utag_choices.push_back(t.choice);
        }
    }
    return tape;
}

LossAndGrads loss_and_grads(const BatchTape& tape, const ModelState& state, const TrainConfig& tcfg) {
    const RowMatrix& w = state.adaptor.weight;
    const RowMatrix& w1 = state.disc.w1;
    const Eigen::Index rows = tape.o_clean.rows();
    const Eigen::Index hidden = w1.cols();
    if (tape.o_clean.cols() != w.rows()) throw ShapeError("tape width does not match the adaptor");

    // Every pathway enters linear1 through the composed map W * W1, so the
    // fused maps themselves are never materialized. Block order: clean,
    // Gaussian stages, fused-stage noise, texture.
    const RowMatrix v = w * w1;
    const std::size_t n_gauss = tape.o_gauss.size();
    const std::size_t n_blocks = 1 + n_gauss + (tape.eps_d ? 1 : 0) + (tape.o_plus ? 1 : 0);
    RowMatrix z(rows * static_cast<Eigen::Index>(n_blocks), hidden);
    const auto block = [rows](auto& m, std::size_t b) { return m.middleRows(static_cast<Eigen::Index>(b) * rows, rows); };

    std::size_t next = 0;
    block(z, next++).noalias() = tape.o_clean * v;
    for (const auto& o : tape.o_gauss) block(z, next++).noalias() = o * v;
    const std::size_t g3_block = tape.eps_d ? next++ : 0;
    if (tape.eps_d) {
        block(z, g3_block) = block(z, 0);
        block(z, g3_block).noalias() += *tape.eps_d * w1;
    }
    const std::size_t plus_block = tape.o_plus ? next++ : 0;
    if (tape.o_plus) block(z, plus_block).noalias() = *tape.o_plus * v;

    LossAndGrads out;
    const Vector u = disc_forward_preact(std::move(z), state.disc, Mode::train, &out.cache);
    Vector grad_u(u.size());
    const auto seg = [&](std::size_t b) { return u.segment(static_cast<Eigen::Index>(b) * rows, rows); };
    const auto grad_seg = [&](std::size_t b) { return grad_u.segment(static_cast<Eigen::Index>(b) * rows, rows); };

    const std::size_t gauss_paths = n_gauss + (tape.eps_d ? 1 : 0);
    const Real normal_weight = gauss_paths > 0 ? static_cast<Real>(gauss_paths) : 1.0;
    {
        const LossValue l = bce_loss(seg(0), 0);
        out.loss.l_bce_n = normal_weight * l.value;
        grad_seg(0) = normal_weight * l.grad;
    }
    for (std::size_t b = 1; b <= gauss_paths; ++b) {
        const LossValue l = bce_loss(seg(b), 1);
        out.loss.l_bce_g += l.value;
        grad_seg(b) = l.grad;
    }
    if (tape.o_plus) {
        const LossValue l = focal_loss(seg(plus_block), tape.texture_targets, tcfg.focal_gamma, tcfg.focal_alpha);
        out.loss.l_focal_t = l.value;
        grad_seg(plus_block) = l.grad;
    }
    out.loss.total = out.loss.l_bce_n + out.loss.l_bce_g + out.loss.l_focal_t;

    auto& dg = out.grads.disc;
    dg = disc_backward_head(grad_u, out.cache, state.disc);

    // m = sum_b O_b^T dZ_b; the fused-stage block shares the clean inputs.
    RowMatrix p_clean = block(dg.pre, 0);
    if (tape.eps_d) p_clean += block(dg.pre, g3_block);
    RowMatrix m = tape.o_clean.transpose() * p_clean;
    for (std::size_t k = 0; k < n_gauss; ++k) m.noalias() += tape.o_gauss[k].transpose() * block(dg.pre, 1 + k);
    if (tape.o_plus) m.noalias() += tape.o_plus->transpose() * block(dg.pre, plus_block);

    out.grads.adaptor.noalias() = m * w1.transpose();
    dg.w1.noalias() = w.transpose() * m;
    if (tape.eps_d) dg.w1.noalias() += tape.eps_d->transpose() * block(dg.pre, g3_block);
    dg.pre.resize(0, 0);
    return out;
}

namespace {

template <typename T>
Eigen::Map<RowMatrix> as_matrix(T& t) {
    return Eigen::Map<RowMatrix>(t.data(), t.rows(), t.cols());
}

template <typename T>
Eigen::Map<const RowMatrix> as_const_matrix(const T& t) {
    return Eigen::Map<const RowMatrix>(t.data(), t.rows(), t.cols());
}

}  // namespace

void apply_update(ModelState& s, const LossAndGrads& lg, const TrainConfig& tcfg) {
    ++s.step;
    const auto& g = lg.grads;
    const auto& a = tcfg.adam;
    adam_update(as_matrix(s.adaptor.weight), g.adaptor, s.adaptor_m, tcfg.lr_adaptor, s.step, a);
    adam_update(as_matrix(s.disc.w1), g.disc.w1, s.w1_m, tcfg.lr_disc, s.step, a);
    adam_update(as_matrix(s.disc.b1), as_const_matrix(g.disc.b1), s.b1_m, tcfg.lr_disc, s.step, a);
    adam_update(as_matrix(s.disc.gamma), as_const_matrix(g.disc.gamma), s.gamma_m, tcfg.lr_disc, s.step, a);
    adam_update(as_matrix(s.disc.shift), as_const_matrix(g.disc.shift), s.shift_m, tcfg.lr_disc, s.step, a);
    Eigen::Map<RowMatrix> w2(s.disc.w2.data(), 1, s.disc.w2.size());
    adam_update(w2, Eigen::Map<const RowMatrix>(g.disc.w2.data(), 1, g.disc.w2.size()), s.w2_m, tcfg.lr_disc, s.step, a);
    Eigen::Map<RowMatrix> b2(&s.disc.b2, 1, 1);
    adam_update(b2, Eigen::Map<const RowMatrix>(&g.disc.b2, 1, 1), s.b2_m, tcfg.lr_disc, s.step, a);
    update_running_stats(s.disc, lg.cache);
}

LossBreakdown train_step(std::span<const TrainingSample* const> batch, std::span<const std::uint64_t> sample_seeds,
                         ModelState& state, const features::FrozenBackbone& bb, const ModelConfig& mcfg,
                         const TrainConfig& tcfg) {
    const BatchTape tape = build_tape(batch, sample_seeds, bb, mcfg, tcfg, state.adaptor);
    const LossAndGrads lg = loss_and_grads(tape, state, tcfg);
    apply_update(state, lg, tcfg);
    return lg.loss;
}

std::vector<std::pair<Real*, std::size_t>> trainable_buffers(ModelState& s) {
    const auto sz = [](const auto& t) { return static_cast<std::size_t>(t.size()); };
    return {{s.adaptor.weight.data(), sz(s.adaptor.weight)},
            {s.disc.w1.data(), sz(s.disc.w1)},
            {s.disc.b1.data(), sz(s.disc.b1)},
            {s.disc.gamma.data(), sz(s.disc.gamma)},
            {s.disc.shift.data(), sz(s.disc.shift)},
            {s.disc.w2.data(), sz(s.disc.w2)},
            {&s.disc.b2, 1}};
}

std::vector<Real> flatten_grads(const ModelGrads& g) {
    std::vector<Real> out;
    const auto append = [&out](const Real* p, Eigen::Index n) { out.insert(out.end(), p, p + n); };
    append(g.adaptor.data(), g.adaptor.size());
    append(g.disc.w1.data(), g.disc.w1.size());
    append(g.disc.b1.data(), g.disc.b1.size());
    append(g.disc.gamma.data(), g.disc.gamma.size());
    append(g.disc.shift.data(), g.disc.shift.size());
    append(g.disc.w2.data(), g.disc.w2.size());
    out.push_back(g.disc.b2);
    return out;
}

std::vector<int> epoch_pool(int train_count, const TrainConfig& tcfg) {
    if (train_count <= 0) throw ArgumentError("training split is empty");
    std::vector<int> all(static_cast<std::size_t>(train_count));
    std::iota(all.begin(), all.end(), 0);
    if (!tcfg.shots) return all;

    const int k = *tcfg.shots;
    if (k > train_count) {
        throw ArgumentError("shots (" + std::to_string(k) + ") exceed the training count (" + std::to_string(train_count) + ")");
    }
    Rng rng = make_rng(tcfg.seed, {0xf5});
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(static_cast<std::size_t>(k));
    std::sort(all.begin(), all.end());
    const int reps = tcfg.replicate.value_or((train_count + k - 1) / k);
    std::vector<int> pool;
    pool.reserve(static_cast<std::size_t>(k) * reps);
    for (int r = 0; r < reps; ++r) pool.insert(pool.end(), all.begin(), all.end());
    return pool;
}

TrainResult train(const std::vector<TrainingSample>& samples, const features::FrozenBackbone& bb, const ModelConfig& mcfg,
                  const TrainConfig& tcfg, const EpochCallback& on_epoch) {
    tcfg.validate();
    const std::vector<int> pool = epoch_pool(static_cast<int>(samples.size()), tcfg);

    TrainResult result;
    result.state = init_model(mcfg, derive_seed(tcfg.seed, {0x1d}));
    {
        std::vector<int> uniq = pool;
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        for (int i : uniq) result.train_ids.push_back(samples[static_cast<std::size_t>(i)].sample_id);
    }

    for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
        std::vector<int> order = pool;
        Rng shuffle_rng = make_rng(tcfg.seed, {0xe0, static_cast<std::uint64_t>(epoch)});
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        LossBreakdown sum;
        int batches = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(tcfg.batch_size)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(tcfg.batch_size));
            std::vector<const TrainingSample*> batch;
            std::vector<std::uint64_t> seeds;
            for (std::size_t j = start; j < end; ++j) {
                batch.push_back(&samples[static_cast<std::size_t>(order[j])]);
                seeds.push_back(derive_seed(tcfg.seed, {0xa7, static_cast<std::uint64_t>(epoch), j}));
            }
            const LossBreakdown l = train_step(batch, seeds, result.state, bb, mcfg, tcfg);
            sum.l_bce_n += l.l_bce_n;
            sum.l_bce_g += l.l_bce_g;
            sum.l_focal_t += l.l_focal_t;
            sum.total += l.total;
            ++batches;
        }
        const Real inv = 1.0 / batches;
        LossBreakdown mean{sum.l_bce_n * inv, sum.l_bce_g * inv, sum.l_focal_t * inv, 0};
        mean.total = mean.l_bce_n + mean.l_bce_g + mean.l_focal_t;
        result.epoch_log.push_back(mean);
        if (on_epoch) on_epoch(epoch, mean);
    }
    return result;
}

TrainResult train(const dataio::DatasetManifest& manifest, const std::string& class_name,
                  const features::FrozenBackbone& bb, const ModelConfig& mcfg, const TrainConfig& tcfg,
                  const EpochCallback& on_epoch) {
    const auto& entry = manifest.find(class_name);
    if (tcfg.shots && *tcfg.shots > static_cast<int>(entry.train.size())) {
        throw ArgumentError("shots exceed the training count of class " + class_name);
    }
    std::vector<TrainingSample> samples;
    samples.reserve(entry.train.size());
    for (const auto& rel : entry.train) {
        samples.push_back(make_training_sample(dataio::load_sample(manifest.resolve(rel)), bb, mcfg));
    }
    return train(samples, bb, mcfg, tcfg, on_epoch);
}

}  // namespace dmad::discriminator
