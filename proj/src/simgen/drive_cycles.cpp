#include "evrk/simgen/drive_cycles.hpp"

#include <cmath>
#include <stdexcept>

namespace evrk::simgen {

namespace {

DriveCycle make_cycle(std::string name, std::initializer_list<double> ts,
                      std::initializer_list<double> vs) {
    DriveCycle c;
    c.name = std::move(name);
    c.t_s = Eigen::Map<const Eigen::VectorXd>(ts.begin(), static_cast<Eigen::Index>(ts.size()));
    c.v_mps = Eigen::Map<const Eigen::VectorXd>(vs.begin(), static_cast<Eigen::Index>(vs.size()));
    return c;
}

}  // namespace

core::TimeSeries sample_cycle(const DriveCycle& cycle, double rate_hz) {
    if (cycle.t_s.size() < 2 || cycle.t_s.size() != cycle.v_mps.size()) {
        throw std::invalid_argument("sample_cycle: malformed breakpoint table");
    }
    if (cycle.t_s[0] != 0.0) {
        throw std::invalid_argument("sample_cycle: table must start at t=0");
    }
    for (Eigen::Index i = 1; i < cycle.t_s.size(); ++i) {
        if (!(cycle.t_s[i] > cycle.t_s[i - 1])) {
            throw std::invalid_argument("sample_cycle: breakpoints must be strictly increasing");
        }
    }
    if (!(rate_hz > 0.0)) {
        throw std::invalid_argument("sample_cycle: rate must be positive");
    }
    const auto n = static_cast<Eigen::Index>(std::floor(cycle.duration_s() * rate_hz));
    Eigen::VectorXd out(n);
    Eigen::Index seg = 0;
    const double dt = 1.0 / rate_hz;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * dt;
        while (seg + 2 < cycle.t_s.size() && t >= cycle.t_s[seg + 1]) ++seg;
        const double t0 = cycle.t_s[seg], t1 = cycle.t_s[seg + 1];
        const double f = (t - t0) / (t1 - t0);
        out[i] = cycle.v_mps[seg] + f * (cycle.v_mps[seg + 1] - cycle.v_mps[seg]);
        if (out[i] < 0.0) out[i] = 0.0;
    }
    return core::TimeSeries(std::move(out), rate_hz, core::Unit::MetersPerSecond);
}

DriveCycle trapezoid_cycle() {
    return make_cycle("trapezoid",
                      {0, 10, 30, 110, 140, 150, 165, 185, 205, 215, 220},
                      {0, 0, 15, 15, 0, 0, 10, 10, 0, 0, 0});
}

DriveCycle sawtooth_cycle() {
    return make_cycle("sawtooth",
                      {0, 20, 40, 60, 80, 100, 120, 140, 160, 180, 200, 220, 240},
                      {0, 12, 0, 12, 0, 12, 0, 12, 0, 12, 0, 12, 0});
}

DriveCycle stop_and_go_cycle() {
    return make_cycle(
        "stop_and_go",
        {0,  8,  20, 34, 40, 48, 60, 78, 90,  96,  110, 128, 140, 146, 160, 178, 190, 200,
         214, 230, 244, 250, 262, 280, 290, 300},
        {0, 0,  9,  9,  0,  0,  12, 12, 0,   0,   13,  13,  0,   0,   11,  11,  0,   0,
         14,  14,  0,   0,   8,   8,   0,   0});
}

DriveCycle udds_like_cycle() {
    return make_cycle(
        "udds_like",
        {0,   20,  35,  60,  80,  95,  110, 130, 150, 160, 175, 200, 225, 245, 260,
         280, 300, 315, 330, 345, 360},
        {0,   0,   8.0, 11.5, 5.0, 9.0, 3.0, 13.5, 6.0, 0,   0,   17.0, 25.347, 22.0, 14.0,
         9.0, 12.0, 6.5, 9.5, 3.0, 0});
}

std::vector<DriveCycle> bundled_cycles() {
    return {trapezoid_cycle(), sawtooth_cycle(), stop_and_go_cycle(), udds_like_cycle()};
}

}  // namespace evrk::simgen
