#include "dmad/core/tensor.hpp"

#include <algorithm>

namespace dmad {

std::size_t Mask::count() const {
    return static_cast<std::size_t>(std::count_if(bits.begin(), bits.end(), [](std::uint8_t b) { return b != 0; }));
}

}  // namespace dmad
