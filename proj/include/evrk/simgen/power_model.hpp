// Longitudinal-dynamics battery power model.
//
// Tractive demand at the wheel:
//   B = delta·m·dvdt + m·g·(f + grade) + (rho·C_D·A/2)·v_rel^2   [N]
// with v_rel = v + headwind. Battery power:
//   demand >= 0 (drive):  P = v / (eta_te·eta_e) · B + P_acc
//   demand  < 0 (regen):  P = k(v) · v · eta_te·eta_m · B + P_acc
// where k(v) ramps 0→0.5 below 5 m/s and 0.5→0.8 from 5 to 25 m/s,
// clamped to [0,1]. Every motive term carries v, so motive power is 0 at rest.
//
// Cold/empty batteries cannot deliver rated power: the available discharge
// power is capped at P_rated·s(temp)·c(soc) with piecewise-linear factors
// s (1.0 at >=15 degC down to 0.7 at -5 degC) and c (1.0 above 40% SOC down
// to 0.6 at 10%), both held at their floors beyond the low ends. The cap
// applies to discharge only; regeneration is not derated.
#pragma once

#include "evrk/core/types.hpp"

namespace evrk::simgen {

struct DeratingSpec {
    double temp_full_C = 15.0;
    double temp_low_C = -5.0;
    double temp_low_factor = 0.7;
    double soc_full_pct = 40.0;
    double soc_low_pct = 10.0;
    double soc_low_factor = 0.6;
};

[[nodiscard]] double temp_derate_factor(double temp_C, const DeratingSpec& spec = {});
[[nodiscard]] double soc_derate_factor(double soc_pct, const DeratingSpec& spec = {});

// P_rated · s(temp) · c(soc), W.
[[nodiscard]] double max_discharge_W(double temp_C, double soc_pct,
                                     const core::VehicleParams& params,
                                     const DeratingSpec& spec = {});

// Regenerative recovery fraction k(v); continuous at v = 5 m/s.
[[nodiscard]] double regen_fraction(double v_mps);

// Tractive demand B in newtons (drag uses relative air speed v + wind).
[[nodiscard]] double tractive_demand_N(double v, double dvdt, double grade, double wind,
                                       const core::VehicleParams& params,
                                       const core::EnvConditions& env);

// Battery power without any derating cap. aux_W is added as-is on top of
// params.accessory_base_W.
[[nodiscard]] double drive_power_W(double v, double dvdt, double grade, double wind,
                                   double aux_W, const core::VehicleParams& params,
                                   const core::EnvConditions& env);

inline constexpr DeratingSpec kDefaultDerating{};

// drive_power_W capped at max_discharge_W(temp, soc) when derate is non-null.
// With derate == nullptr this is bit-identical to drive_power_W.
[[nodiscard]] double ground_truth_power(double v, double dvdt, double grade, double wind,
                                        double aux_W, double temp_C, double soc_pct,
                                        const core::VehicleParams& params,
                                        const core::EnvConditions& env,
                                        const DeratingSpec* derate = &kDefaultDerating);

}  // namespace evrk::simgen
