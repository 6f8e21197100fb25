// Bundled synthetic drive cycles.
//
// Each cycle is a breakpoint table (time s, speed m/s) sampled by linear
// interpolation. The tables are self-contained stand-ins for standard
// dynamometer schedules: "udds_like" follows the urban shape (idle-heavy,
// ~8.7 m/s mean, 25.347 m/s peak), the others exercise simple regimes.
#pragma once

#include <string>
#include <vector>

#include "evrk/core/types.hpp"

namespace evrk::simgen {

struct DriveCycle {
    std::string name;
    Eigen::VectorXd t_s;    // strictly increasing, starts at 0
    Eigen::VectorXd v_mps;  // same length, all >= 0

    [[nodiscard]] double duration_s() const { return t_s[t_s.size() - 1]; }
};

// Piecewise-linear sampling on [0, duration) at rate_hz; exactly
// floor(duration * rate_hz) samples.
[[nodiscard]] core::TimeSeries sample_cycle(const DriveCycle& cycle, double rate_hz);

[[nodiscard]] DriveCycle trapezoid_cycle();
[[nodiscard]] DriveCycle sawtooth_cycle();
[[nodiscard]] DriveCycle stop_and_go_cycle();
[[nodiscard]] DriveCycle udds_like_cycle();

[[nodiscard]] std::vector<DriveCycle> bundled_cycles();

}  // namespace evrk::simgen
