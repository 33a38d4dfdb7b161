#include "dmad/features/stats.hpp"

#include "dmad/core/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace dmad::features {

std::vector<Real> channel_stddev(const std::vector<FeatureMap>& maps) {
    if (maps.empty()) throw ArgumentError("feature stats need at least one map");
    const int c = maps.front().channels();
    Eigen::Index n = 0;
    RowVector mean = RowVector::Zero(c);
    for (const auto& m : maps) {
        if (m.channels() != c) throw ShapeError("feature stats: channel counts differ");
        mean += m.values.colwise().sum();
        n += m.values.rows();
    }
    if (n == 0) throw ArgumentError("feature stats: maps have no positions");
    mean /= static_cast<Real>(n);
    RowVector var = RowVector::Zero(c);
    for (const auto& m : maps) var += (m.values.rowwise() - mean).array().square().matrix().colwise().sum();
    var /= static_cast<Real>(n);
    std::vector<Real> out(static_cast<std::size_t>(c));
    for (int i = 0; i < c; ++i) out[static_cast<std::size_t>(i)] = std::sqrt(var[i]);
    return out;
}

void emit_feature_stats(const std::vector<FeatureMap>& maps, const std::filesystem::path& out_path) {
    const auto stds = channel_stddev(maps);
    std::ofstream out(out_path);
    if (!out) throw IoError("cannot write " + out_path.string());
    out << "channel,std\n";
    char buf[64];
    for (std::size_t i = 0; i < stds.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, stds[i]);
        out << buf;
    }
}

}  // namespace dmad::features
