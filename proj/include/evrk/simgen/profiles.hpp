// Named environment profiles: road grade, headwind, auxiliary load.
//
// Builders take a sample count at 10 Hz and return smooth deterministic
// shapes. Grade profiles stay within [-0.19, 0.19]; wind builders stay inside
// a chosen Beaufort class; the climate-load profile is a ~977 W mean pattern
// with compressor bursts.
#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace evrk::simgen {

struct GradeProfile {
    std::string name;
    Eigen::VectorXd grade;  // dimensionless fraction per 10 Hz sample
};

struct WindProfile {
    std::string name;
    Eigen::VectorXd wind_mps;
};

struct AuxProfile {
    std::string name;
    Eigen::VectorXd aux_W;
};

[[nodiscard]] GradeProfile grade_flat(Eigen::Index n);
[[nodiscard]] GradeProfile grade_rolling(Eigen::Index n);   // ±5 %, zero mean
[[nodiscard]] GradeProfile grade_hill_climb(Eigen::Index n);  // mostly uphill, ±18 % extremes
[[nodiscard]] GradeProfile grade_descent(Eigen::Index n);     // net downhill

// Sinusoid centered in the named Beaufort class, staying inside its range.
[[nodiscard]] WindProfile wind_for_class(int beaufort_index, Eigen::Index n);
[[nodiscard]] WindProfile wind_calm(Eigen::Index n);           // ~0.15 m/s
[[nodiscard]] WindProfile wind_strong_breeze(Eigen::Index n);  // ~12.3 m/s

[[nodiscard]] AuxProfile aux_off(Eigen::Index n);
[[nodiscard]] AuxProfile aux_low(Eigen::Index n);      // 200 W constant
[[nodiscard]] AuxProfile aux_climate(Eigen::Index n);  // ~955-1125 W bursts

}  // namespace evrk::simgen
