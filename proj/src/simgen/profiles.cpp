#include "evrk/simgen/profiles.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "evrk/simgen/beaufort.hpp"

namespace evrk::simgen {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kDt = 0.1;  // profiles are built at 10 Hz

Eigen::VectorXd two_tone(Eigen::Index n, double mean, double a1, double period1_s, double a2,
                         double period2_s) {
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * kDt;
        out[i] = mean + a1 * std::sin(kTwoPi * t / period1_s) +
                 a2 * std::sin(kTwoPi * t / period2_s + 1.0);
    }
    return out;
}

}  // namespace

GradeProfile grade_flat(Eigen::Index n) {
    return {"flat", Eigen::VectorXd::Zero(n)};
}

GradeProfile grade_rolling(Eigen::Index n) {
    return {"rolling", two_tone(n, 0.0, 0.05, 80.0, 0.0, 1.0)};
}

GradeProfile grade_hill_climb(Eigen::Index n) {
    return {"hill_climb", two_tone(n, 0.012, 0.09, 130.0, 0.08, 47.0)};
}

GradeProfile grade_descent(Eigen::Index n) {
    return {"descent", two_tone(n, -0.08, 0.07, 110.0, 0.03, 41.0)};
}

WindProfile wind_for_class(int beaufort_index, Eigen::Index n) {
    if (beaufort_index < 0 || beaufort_index >= kBeaufortClassCount - 1) {
        throw std::invalid_argument("wind_for_class: index must name a bounded class");
    }
    const auto& c = beaufort_classes()[static_cast<std::size_t>(beaufort_index)];
    const double width = c.hi_mps - c.lo_mps;
    const double mean = c.lo_mps + 0.5 * width;
    const double amp = 0.3 * width;
    Eigen::VectorXd w = two_tone(n, mean, amp, 97.0, 0.12 * width, 31.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        w[i] = std::clamp(w[i], c.lo_mps, std::nextafter(c.hi_mps, c.lo_mps));
    }
    return {std::string(c.name), std::move(w)};
}

WindProfile wind_calm(Eigen::Index n) {
    return {"calm", two_tone(n, 0.15, 0.05, 73.0, 0.012, 19.0)};
}

WindProfile wind_strong_breeze(Eigen::Index n) {
    Eigen::VectorXd w = two_tone(n, 12.25, 0.75, 101.0, 0.18, 29.0);
    return {"strong_breeze", std::move(w)};
}

AuxProfile aux_off(Eigen::Index n) {
    return {"aux_off", Eigen::VectorXd::Zero(n)};
}

AuxProfile aux_low(Eigen::Index n) {
    return {"aux_low", Eigen::VectorXd::Constant(n, 200.0)};
}

AuxProfile aux_climate(Eigen::Index n) {
    Eigen::VectorXd a(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * kDt;
        const double burst = std::sin(kTwoPi * t / 90.0) > 0.86 ? 170.0 : 0.0;
        a[i] = 955.0 + burst + 8.0 * std::sin(kTwoPi * t / 13.0);
    }
    return {"climate", std::move(a)};
}

}  // namespace evrk::simgen
