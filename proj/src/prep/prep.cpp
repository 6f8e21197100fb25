#include "evrk/prep/prep.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace evrk::prep {

std::vector<core::PartitionedWindow> partition(const RawChannels& raw) {
    const Eigen::Index n = raw.veh_sp.size();
    const Eigen::VectorXd* channels[] = {&raw.road_el, &raw.veh_acc, &raw.aux_ld, &raw.wind_sp};
    for (const auto* ch : channels) {
        if (ch->size() != n) {
            throw std::invalid_argument("partition: channel length mismatch");
        }
    }
    const bool has_act = raw.act_pow.size() > 0;
    if (has_act && raw.act_pow.size() != n) {
        throw std::invalid_argument("partition: act_pow length mismatch");
    }
    const bool has_soc = raw.soc_trace.size() > 0;
    if (has_soc && raw.soc_trace.size() != n) {
        throw std::invalid_argument("partition: soc_trace length mismatch");
    }

    const Eigen::Index count = n / core::kWindowSamples;
    std::vector<core::PartitionedWindow> out;
    out.reserve(static_cast<std::size_t>(count));
    for (Eigen::Index k = 0; k < count; ++k) {
        const Eigen::Index off = k * core::kWindowSamples;
        core::PartitionedWindow w;
        w.veh_sp = raw.veh_sp.segment(off, core::kWindowSamples);
        w.road_el = raw.road_el.segment(off, core::kWindowSamples);
        w.veh_acc = raw.veh_acc.segment(off, core::kWindowSamples);
        w.aux_ld = raw.aux_ld.segment(off, core::kWindowSamples);
        w.wind_sp = raw.wind_sp.segment(off, core::kWindowSamples);
        w.env_temp = raw.env_temp;
        w.batt_soc = has_soc ? raw.soc_trace[off] : raw.batt_soc;
        if (has_act) {
            Eigen::VectorXd target(core::kWindowSeconds);
            for (int s = 0; s < core::kWindowSeconds; ++s) {
                target[s] = raw.act_pow.segment(off + 10 * s, 10).mean();
            }
            w.act_pow = std::move(target);
        }
        out.push_back(std::move(w));
    }
    return out;
}

Eigen::Matrix<double, 10, 7> resample_window(const core::PartitionedWindow& w) {
    const auto check = core::validate_window(w);
    if (!check) {
        throw std::invalid_argument("resample_window: invalid window: " + check.violation);
    }
    Eigen::Matrix<double, 10, 7> table;
    const Eigen::VectorXd* varying[] = {&w.veh_sp, &w.road_el, &w.veh_acc, &w.aux_ld, &w.wind_sp};
    for (int s = 0; s < core::kWindowSeconds; ++s) {
        for (int c = 0; c < 5; ++c) {
            table(s, c) = varying[c]->segment(10 * s, 10).mean();
        }
        table(s, 5) = w.env_temp;
        table(s, 6) = w.batt_soc;
    }
    return table;
}

Eigen::VectorXd grade_from_elevation(const Eigen::VectorXd& elevation_m,
                                      const Eigen::VectorXd& speed_mps,
                                      double sample_rate_hz) {
    if (elevation_m.size() != speed_mps.size()) {
        throw std::invalid_argument("grade_from_elevation: length mismatch");
    }
    if (!(sample_rate_hz > 0.0)) {
        throw std::invalid_argument("grade_from_elevation: sample_rate_hz must be positive");
    }
    const double dt = 1.0 / sample_rate_hz;
    constexpr double kMinSpeed = 1e-9;
    Eigen::VectorXd grade = Eigen::VectorXd::Zero(elevation_m.size());
    for (Eigen::Index i = 1; i < elevation_m.size(); ++i) {
        const double dist = speed_mps[i] * dt;
        if (dist > kMinSpeed * dt) {
            grade[i] = (elevation_m[i] - elevation_m[i - 1]) / dist;
        }
    }
    return grade;
}

NormalizationParams fit_normalization(const core::Dataset& train) {
    if (train.empty()) {
        throw std::invalid_argument("fit_normalization: empty dataset");
    }
    constexpr double kInf = std::numeric_limits<double>::infinity();
    struct Acc {
        double min = kInf;
        double max = -kInf;
        void eat(double v) {
            if (v < min) min = v;
            if (v > max) max = v;
        }
        void eat(const Eigen::VectorXd& v) {
            min = std::min(min, v.minCoeff());
            max = std::max(max, v.maxCoeff());
        }
    };
    Acc acc[8];
    bool any_act = false;
    for (const auto& w : train.windows) {
        acc[0].eat(w.veh_sp);
        acc[1].eat(w.road_el);
        acc[2].eat(w.veh_acc);
        acc[3].eat(w.aux_ld);
        acc[4].eat(w.wind_sp);
        acc[5].eat(w.env_temp);
        acc[6].eat(w.batt_soc);
        if (w.act_pow) {
            acc[7].eat(*w.act_pow);
            any_act = true;
        }
    }
    NormalizationParams p;
    const Channel order[] = {Channel::VehSp,  Channel::RoadEl, Channel::VehAcc, Channel::AuxLd,
                             Channel::WindSp, Channel::EnvTemp, Channel::BattSoc};
    for (int c = 0; c < 7; ++c) {
        p.set(order[c], acc[c].min, acc[c].max);
    }
    if (any_act) {
        p.set(Channel::ActPow, acc[7].min, acc[7].max);
    }
    return p;
}

}  // namespace evrk::prep
