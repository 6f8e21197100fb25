// Beaufort wind-speed classification.
//
// The thirteen classes tile [0, inf) with half-open ranges [lo, hi); the
// published class boundaries leave small gaps (e.g. 1.5 vs 1.6 m/s), so each
// class's upper bound is the next class's lower bound. The first eight
// classes (Calm .. Near Gale) are the drivable conditions used for data
// generation.
#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace evrk::simgen {

struct BeaufortClass {
    std::uint8_t index;
    std::string_view name;
    double lo_mps;  // inclusive
    double hi_mps;  // exclusive; +inf for the last class
};

inline constexpr int kBeaufortClassCount = 13;
inline constexpr int kDrivableBeaufortClasses = 8;

[[nodiscard]] const std::array<BeaufortClass, kBeaufortClassCount>& beaufort_classes();

// Returns the unique class containing the speed.
// Throws std::invalid_argument for negative or non-finite speeds.
[[nodiscard]] const BeaufortClass& classify_wind(double speed_mps);

}  // namespace evrk::simgen
