#include "evrk/simgen/generator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "evrk/core/rng.hpp"
#include "evrk/prep/prep.hpp"

namespace evrk::simgen {

void GenerationGrid::validate() const {
    if (temps_C.empty() || grade_profiles.empty() || initial_socs.empty() ||
        drive_cycles.empty() || wind_profiles.empty() || aux_profiles.empty()) {
        throw std::invalid_argument("GenerationGrid: every dimension needs >= 1 entry");
    }
    for (const auto& g : grade_profiles) {
        if (g.grade.size() == 0) throw std::invalid_argument("GenerationGrid: empty grade profile");
    }
    for (const auto& c : drive_cycles) {
        if (c.speed.size() == 0) throw std::invalid_argument("GenerationGrid: empty cycle");
    }
    for (const auto& w : wind_profiles) {
        if (w.wind_mps.size() == 0) throw std::invalid_argument("GenerationGrid: empty wind profile");
    }
    for (const auto& a : aux_profiles) {
        if (a.aux_W.size() == 0) throw std::invalid_argument("GenerationGrid: empty aux profile");
    }
    for (double s : initial_socs) {
        if (!(s > 0.0 && s <= 100.0)) {
            throw std::invalid_argument("GenerationGrid: initial soc must lie in (0,100]");
        }
    }
    if (!(noise_scale >= 0.0)) {
        throw std::invalid_argument("GenerationGrid: noise_scale must be >= 0");
    }
}

std::size_t GenerationGrid::cardinality() const noexcept {
    return temps_C.size() * grade_profiles.size() * initial_socs.size() * drive_cycles.size() *
           wind_profiles.size() * aux_profiles.size();
}

namespace {

constexpr double kDt = 0.1;

// Smoothed bounded jitter: first-order low-pass over uniform innovations.
Eigen::VectorXd smooth_jitter(Eigen::Index n, double amplitude, core::Engine& rng) {
    Eigen::VectorXd j = Eigen::VectorXd::Zero(n);
    if (amplitude <= 0.0) return j;
    double state = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        state = 0.98 * state + 0.2 * amplitude * (core::uniform01(rng) - 0.5);
        j[i] = state;
    }
    return j;
}

struct CellInputs {
    Eigen::VectorXd target_v, grade, wind, aux;
    double temp_C = 15.0;
    double soc0 = 100.0;
};

// Largest speed in [0, v_target] whose demand meets the discharge cap.
double reduce_speed_to_cap(double v_target, double v_prev, double grade, double wind, double aux,
                           double cap, const core::VehicleParams& params,
                           const core::EnvConditions& env) {
    auto demand = [&](double v) {
        return drive_power_W(v, (v - v_prev) / kDt, grade, wind, aux, params, env);
    };
    if (demand(0.0) >= cap) return 0.0;
    double lo = 0.0, hi = v_target;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (demand(mid) > cap) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return lo;
}

}  // namespace

core::Dataset generate(const GenerationGrid& grid, const core::VehicleParams& params,
                       GenerationSummary* summary) {
    grid.validate();
    params.validate();

    core::Dataset ds;
    ds.provenance = "simgen";
    GenerationSummary local;
    GenerationSummary& sum = summary ? *summary : local;
    sum = {};

    const DeratingSpec derate{};
    std::size_t cell = 0;
    for (double temp : grid.temps_C)
        for (const auto& gp : grid.grade_profiles)
            for (double soc0 : grid.initial_socs)
                for (const auto& cyc : grid.drive_cycles)
                    for (const auto& wp : grid.wind_profiles)
                        for (const auto& ap : grid.aux_profiles) {
                            const Eigen::Index n = cyc.speed.size();
                            CellInputs in;
                            in.target_v = cyc.speed.values();
                            in.temp_C = temp;
                            in.soc0 = soc0;
                            in.grade.resize(n);
                            in.wind.resize(n);
                            in.aux.resize(n);
                            for (Eigen::Index i = 0; i < n; ++i) {
                                in.grade[i] = gp.grade[i % gp.grade.size()];
                                in.wind[i] = wp.wind_mps[i % wp.wind_mps.size()];
                                in.aux[i] = ap.aux_W[i % ap.aux_W.size()];
                            }
                            auto rng = core::derived_engine(grid.rng_seed, 1, cell);
                            in.wind += smooth_jitter(n, 0.3 * grid.noise_scale, rng);
                            in.aux += smooth_jitter(n, 25.0 * grid.noise_scale, rng);
                            in.wind = in.wind.cwiseMax(0.0);
                            in.aux = in.aux.cwiseMax(0.0);

                            core::EnvConditions env;
                            env.air_density = grid.air_density;
                            env.gravity = grid.gravity;
                            env.temp_C = temp;

                            // Pass 1: realize delivered speed under the cap.
                            Eigen::VectorXd v = in.target_v;
                            if (grid.derating_enabled) {
                                double soc = soc0;
                                for (Eigen::Index i = 0; i < n; ++i) {
                                    const double v_prev = i == 0 ? v[0] : v[i - 1];
                                    const double cap =
                                        max_discharge_W(temp, soc, params, derate);
                                    const double dvdt = (v[i] - v_prev) / kDt;
                                    double p = drive_power_W(v[i], dvdt, in.grade[i], in.wind[i],
                                                             in.aux[i], params, env);
                                    if (p > cap) {
                                        v[i] = reduce_speed_to_cap(v[i], v_prev, in.grade[i],
                                                                   in.wind[i], in.aux[i], cap,
                                                                   params, env);
                                        p = cap;
                                    }
                                    soc -= p * kDt / params.battery_capacity_J * 100.0;
                                    if (soc <= 0.0) break;
                                }
                            }

                            // Pass 2: channels, delivered power, SOC trace.
                            Eigen::VectorXd acc(n), elev(n), pow(n), soc_trace(n);
                            for (Eigen::Index i = 0; i < n; ++i) {
                                if (i == 0) {
                                    acc[i] = n > 1 ? (v[1] - v[0]) / kDt : 0.0;
                                } else if (i + 1 == n) {
                                    acc[i] = (v[i] - v[i - 1]) / kDt;
                                } else {
                                    acc[i] = (v[i + 1] - v[i - 1]) / (2.0 * kDt);
                                }
                            }
                            elev[0] = 100.0;
                            for (Eigen::Index i = 1; i < n; ++i) {
                                elev[i] = elev[i - 1] + in.grade[i] * v[i] * kDt;
                            }
                            double soc = soc0;
                            Eigen::Index usable = n;
                            for (Eigen::Index i = 0; i < n; ++i) {
                                pow[i] = ground_truth_power(
                                    v[i], acc[i], in.grade[i], in.wind[i], in.aux[i], temp, soc,
                                    params, env, grid.derating_enabled ? &derate : nullptr);
                                soc -= pow[i] * kDt / params.battery_capacity_J * 100.0;
                                soc_trace[i] = soc;
                                if (soc <= 0.0) {
                                    usable = i;
                                    break;
                                }
                            }

                            if (usable < n) {
                                ++sum.truncated_cells;
                                std::ostringstream msg;
                                msg << "cell " << cell << " (temp=" << temp << " grade=" << gp.name
                                    << " soc0=" << soc0 << " cycle=" << cyc.name
                                    << " wind=" << wp.name << " aux=" << ap.name
                                    << "): battery exhausted at t=" << static_cast<double>(usable) * kDt
                                    << " s; truncated";
                                sum.warnings.push_back(msg.str());
                            }

                            const Eigen::Index full = usable - usable % core::kWindowSamples;
                            if (full > 0) {
                                prep::RawChannels raw;
                                raw.veh_sp = v.head(full);
                                raw.road_el = elev.head(full);
                                raw.veh_acc = acc.head(full);
                                raw.aux_ld = in.aux.head(full);
                                raw.wind_sp = in.wind.head(full);
                                raw.env_temp = temp;
                                raw.act_pow = pow.head(full);
                                // SOC at a window's start is the state before
                                // its first sample is consumed.
                                raw.soc_trace.resize(full);
                                raw.soc_trace[0] = soc0;
                                for (Eigen::Index i = 1; i < full; ++i) {
                                    raw.soc_trace[i] = soc_trace[i - 1];
                                }
                                auto windows = prep::partition(raw);
                                sum.windows += windows.size();
                                for (auto& w : windows) {
                                    ds.windows.push_back(std::move(w));
                                    ds.trip_ids.push_back(static_cast<int64_t>(cell));
                                }
                            }
                            ++sum.cells;
                            ++cell;
                        }
    return ds;
}

}  // namespace evrk::simgen
