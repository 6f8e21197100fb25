#include "evrk/simgen/beaufort.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace evrk::simgen {

const std::array<BeaufortClass, kBeaufortClassCount>& beaufort_classes() {
    static constexpr double kInf = std::numeric_limits<double>::infinity();
    static const std::array<BeaufortClass, kBeaufortClassCount> classes = {{
        {0, "Calm", 0.0, 0.5},
        {1, "Light Air", 0.5, 1.6},
        {2, "Light Breeze", 1.6, 3.4},
        {3, "Gentle Breeze", 3.4, 5.5},
        {4, "Moderate Breeze", 5.5, 8.0},
        {5, "Fresh Breeze", 8.0, 10.8},
        {6, "Strong Breeze", 10.8, 13.9},
        {7, "Near Gale", 13.9, 17.2},
        {8, "Gale", 17.2, 20.8},
        {9, "Strong Gale", 20.8, 24.5},
        {10, "Storm", 24.5, 28.5},
        {11, "Violent Storm", 28.5, 32.7},
        {12, "Hurricane", 32.7, kInf},
    }};
    return classes;
}

const BeaufortClass& classify_wind(double speed_mps) {
    if (!std::isfinite(speed_mps) || speed_mps < 0.0) {
        throw std::invalid_argument("classify_wind: speed must be finite and >= 0");
    }
    for (const auto& c : beaufort_classes()) {
        if (speed_mps >= c.lo_mps && speed_mps < c.hi_mps) return c;
    }
    return beaufort_classes().back();
}

}  // namespace evrk::simgen
