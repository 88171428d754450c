#pragma once

#include <cstddef>
#include <span>

namespace psmdid::detail {

struct ThresholdPoint {
    std::size_t t;
    double h;
};

// Empty span for unsupported arl0 values.
std::span<const ThresholdPoint> cpm_threshold_table(int arl0);

}  // namespace psmdid::detail
