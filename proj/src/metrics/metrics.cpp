#include "dmad/metrics/metrics.hpp"

#include "dmad/core/error.hpp"
#include "dmad/dataio/sample_io.hpp"
#include "dmad/inference/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace dmad::metrics {

Real auroc(std::span<const Real> scores, std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size()) throw ArgumentError("auroc: scores and labels differ in length");
    const std::size_t n = scores.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Sum of positive midranks (1-based), accumulated in doubled units to
    // stay integral.
    std::uint64_t n_pos = 0;
    long double rank2_pos = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
        const std::uint64_t rank2 = (i + 1) + j;  // 2 * average of ranks i+1..j
        for (std::size_t k = i; k < j; ++k) {
            if (labels[idx[k]]) {
                ++n_pos;
                rank2_pos += rank2;
            }
        }
        i = j;
    }
    const std::uint64_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw ArgumentError("auroc needs both positive and negative labels");
    const long double u2 = rank2_pos - static_cast<long double>(n_pos) * (n_pos + 1);
    return static_cast<Real>(u2 / (2.0L * n_pos * n_neg));
}

Real pixel_auroc(const std::vector<Field>& scores, const std::vector<Mask>& gt) {
    if (scores.size() != gt.size()) throw ArgumentError("pixel_auroc: map and mask counts differ");
    std::vector<Real> s;
    std::vector<std::uint8_t> l;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i].width != gt[i].width || scores[i].height != gt[i].height) {
            throw ShapeError("pixel_auroc: score map and mask sizes differ");
        }
        s.insert(s.end(), scores[i].values.begin(), scores[i].values.end());
        l.insert(l.end(), gt[i].bits.begin(), gt[i].bits.end());
    }
    return auroc(s, l);
}

Components connected_components(const Mask& m) {
    Components c;
    c.labels.assign(m.bits.size(), 0);
    std::vector<int> stack;
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            const int start = y * m.width + x;
            if (!m.bits[static_cast<std::size_t>(start)] || c.labels[static_cast<std::size_t>(start)]) continue;
            const int label = ++c.count;
            c.labels[static_cast<std::size_t>(start)] = label;
            stack.push_back(start);
            while (!stack.empty()) {
                const int p = stack.back();
                stack.pop_back();
                const int py = p / m.width, px = p % m.width;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int ny = py + dy, nx = px + dx;
                        if (ny < 0 || nx < 0 || ny >= m.height || nx >= m.width) continue;
                        const auto q = static_cast<std::size_t>(ny * m.width + nx);
                        if (m.bits[q] && !c.labels[q]) {
                            c.labels[q] = label;
                            stack.push_back(static_cast<int>(q));
                        }
                    }
                }
            }
        }
    }
    return c;
}

Real aupro(const std::vector<Field>& scores, const std::vector<Mask>& gt, Real fpr_limit) {
    if (scores.size() != gt.size()) throw ArgumentError("aupro: map and mask counts differ");
    if (!(fpr_limit > 0 && fpr_limit <= 1)) throw ArgumentError("fpr_limit must lie in (0, 1]");

    // Flatten pixels with their global region id (-1 for negatives).
    struct Px {
        Real score;
        int region;
    };
    std::vector<Px> px;
    std::vector<std::size_t> region_size;
    std::size_t n_neg = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const auto& s = scores[i];
        if (s.width != gt[i].width || s.height != gt[i].height) throw ShapeError("aupro: score map and mask sizes differ");
        const auto cc = connected_components(gt[i]);
        const int base = static_cast<int>(region_size.size());
        region_size.resize(region_size.size() + static_cast<std::size_t>(cc.count), 0);
        for (std::size_t k = 0; k < s.values.size(); ++k) {
            const int lab = cc.labels[k];
            if (lab) {
                ++region_size[static_cast<std::size_t>(base + lab - 1)];
                px.push_back({s.values[k], base + lab - 1});
            } else {
                ++n_neg;
                px.push_back({s.values[k], -1});
            }
        }
    }
    if (region_size.empty()) throw ArgumentError("aupro needs at least one ground-truth region");
    if (n_neg == 0) throw ArgumentError("aupro needs at least one negative pixel");

    std::sort(px.begin(), px.end(), [](const Px& a, const Px& b) { return a.score > b.score; });
    std::vector<Real> unique;
    for (const auto& p : px) {
        if (unique.empty() || p.score != unique.back()) unique.push_back(p.score);
    }
    std::vector<Real> thresholds;  // descending
    if (unique.size() <= kMaxThresholds) {
        thresholds = unique;
    } else {
        thresholds.reserve(kMaxThresholds);
        const Real step = static_cast<Real>(unique.size() - 1) / (kMaxThresholds - 1);
        for (std::size_t i = 0; i < kMaxThresholds; ++i) {
            thresholds.push_back(unique[static_cast<std::size_t>(std::llround(i * step))]);
        }
    }

    const Real n_regions = static_cast<Real>(region_size.size());
    std::vector<std::size_t> hit(region_size.size(), 0);
    std::size_t fp = 0;
    std::size_t next = 0;

    Real area = 0, prev_fpr = 0, prev_pro = 0;
    for (Real t : thresholds) {
        while (next < px.size() && px[next].score >= t) {
            const int r = px[next].region;
            if (r < 0) {
                ++fp;
            } else {
                ++hit[static_cast<std::size_t>(r)];
            }
            ++next;
        }
        const Real fpr = static_cast<Real>(fp) / static_cast<Real>(n_neg);
        Real pro = 0;
        for (std::size_t r = 0; r < hit.size(); ++r) pro += static_cast<Real>(hit[r]) / static_cast<Real>(region_size[r]);
        pro /= n_regions;

        if (fpr >= fpr_limit) {
            if (fpr > prev_fpr) {
                const Real frac = (fpr_limit - prev_fpr) / (fpr - prev_fpr);
                const Real pro_at = prev_pro + frac * (pro - prev_pro);
                area += 0.5 * (prev_pro + pro_at) * (fpr_limit - prev_fpr);
            }
            return area / fpr_limit;
        }
        area += 0.5 * (prev_pro + pro) * (fpr - prev_fpr);
        prev_fpr = fpr;
        prev_pro = pro;
    }
    return area / fpr_limit;
}

Evaluation evaluate(const dataio::DatasetManifest& manifest, const std::string& class_name,
                    const discriminator::Checkpoint& model, const features::FrozenBackbone& bb, Real fpr_limit) {
    const auto& entry = manifest.find(class_name);
    if (entry.test.empty()) throw ArgumentError("class " + class_name + " has an empty test split");
    Evaluation ev;
    std::vector<Field> maps;
    std::vector<Mask> masks;
    std::vector<Real> image_scores;
    std::vector<std::uint8_t> labels;
    for (const auto& rel : entry.test) {
        const auto bundle = dataio::load_sample(manifest.resolve(rel));
        auto s = inference::score_sample(bundle, model, bb);
        const bool anomalous = bundle.label == dataio::Label::anomalous;
        ev.samples.push_back({bundle.sample_id, s.image_score, anomalous});
        image_scores.push_back(s.image_score);
        labels.push_back(anomalous);
        masks.push_back(bundle.gt_mask ? *bundle.gt_mask : Mask(bundle.rgb.width, bundle.rgb.height));
        maps.push_back(std::move(s.pixel_scores));
    }
    auto& r = ev.report;
    r.class_name = class_name;
    r.n_test = static_cast<int>(entry.test.size());
    for (const auto& m : maps) r.n_pixels += m.values.size();
    r.fpr_limit = fpr_limit;
    r.i_auroc = auroc(image_scores, labels);
    r.p_auroc = pixel_auroc(maps, masks);
    r.p_aupro = aupro(maps, masks, fpr_limit);
    return ev;
}

nlohmann::json to_json(const EvalReport& r) {
    return {{"class", r.class_name}, {"i_auroc", r.i_auroc}, {"p_auroc", r.p_auroc},
            {"p_aupro", r.p_aupro},  {"n_test", r.n_test},   {"fpr_limit", r.fpr_limit}};
}

MeanScores macro_mean(const std::vector<EvalReport>& reports) {
    MeanScores m;
    if (reports.empty()) return m;
    for (const auto& r : reports) {
        m.i_auroc += r.i_auroc;
        m.p_auroc += r.p_auroc;
        m.p_aupro += r.p_aupro;
    }
    const Real n = static_cast<Real>(reports.size());
    m.i_auroc /= n;
    m.p_auroc /= n;
    m.p_aupro /= n;
    return m;
}

nlohmann::json aggregate_json(const std::vector<EvalReport>& reports) {
    nlohmann::json classes = nlohmann::json::array();
    for (const auto& r : reports) classes.push_back(to_json(r));
    const auto m = macro_mean(reports);
    return {{"classes", classes}, {"mean", {{"i_auroc", m.i_auroc}, {"p_auroc", m.p_auroc}, {"p_aupro", m.p_aupro}}}};
}

std::string format_table(const std::vector<EvalReport>& reports) {
    const auto mean = macro_mean(reports);
    std::string out;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-12s", "metric");
    out += buf;
    for (const auto& r : reports) {
        std::snprintf(buf, sizeof buf, " %9s", r.class_name.c_str());
        out += buf;
    }
    out += "      Mean\n";
    const auto row = [&](const char* label, Real EvalReport::*field, Real m) {
        std::snprintf(buf, sizeof buf, "%-12s", label);
        out += buf;
        for (const auto& r : reports) {
            std::snprintf(buf, sizeof buf, " %9.4f", r.*field);
            out += buf;
        }
        std::snprintf(buf, sizeof buf, " %9.4f\n", m);
        out += buf;
    };
    row("I-AUROC", &EvalReport::i_auroc, mean.i_auroc);
    row("P-AUROC", &EvalReport::p_auroc, mean.p_auroc);
    row("P-AUPRO", &EvalReport::p_aupro, mean.p_aupro);
    return out;
}

}  // namespace dmad::metrics
