#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace dmad {

using Real = double;

// Row-major dense matrix. Feature maps store one row per grid position.
using RowMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
using RowVector = Eigen::Matrix<Real, 1, Eigen::Dynamic>;

// Binary mask, one byte per pixel (0 or 1), row-major.
struct Mask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;

    Mask() = default;
    Mask(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), bits(static_cast<std::size_t>(w) * h, fill) {}

    std::uint8_t& at(int y, int x) { return bits[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int y, int x) const { return bits[static_cast<std::size_t>(y) * width + x]; }
    std::size_t count() const;
    bool empty_set() const { return count() == 0; }
};

// Dense 2-D scalar field (scores, noise), row-major.
struct Field {
    int width = 0;
    int height = 0;
    std::vector<Real> values;

    Field() = default;
    Field(int w, int h, Real fill = 0)
        : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

    Real& at(int y, int x) { return values[static_cast<std::size_t>(y) * width + x]; }
    Real at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

}  // namespace dmad
