#include "evrk/simgen/power_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace evrk::simgen {

namespace {

// Linear ramp from (x_lo, y_lo) to (x_hi, 1.0), clamped outside.
double ramp_factor(double x, double x_lo, double y_lo, double x_hi) {
    if (x >= x_hi) return 1.0;
    if (x <= x_lo) return y_lo;
    return y_lo + (1.0 - y_lo) * (x - x_lo) / (x_hi - x_lo);
}

}  // namespace

double temp_derate_factor(double temp_C, const DeratingSpec& spec) {
    return ramp_factor(temp_C, spec.temp_low_C, spec.temp_low_factor, spec.temp_full_C);
}

double soc_derate_factor(double soc_pct, const DeratingSpec& spec) {
    return ramp_factor(soc_pct, spec.soc_low_pct, spec.soc_low_factor, spec.soc_full_pct);
}

double max_discharge_W(double temp_C, double soc_pct, const core::VehicleParams& params,
                       const DeratingSpec& spec) {
    return params.rated_power_W * temp_derate_factor(temp_C, spec) *
           soc_derate_factor(soc_pct, spec);
}

double regen_fraction(double v_mps) {
    if (!(v_mps >= 0.0)) {
        throw std::invalid_argument("regen_fraction: v must be >= 0");
    }
    const double k = v_mps < 5.0 ? 0.5 * v_mps / 5.0 : 0.5 + 0.3 * (v_mps - 5.0) / 20.0;
    return std::clamp(k, 0.0, 1.0);
}

double tractive_demand_N(double v, double dvdt, double grade, double wind,
                         const core::VehicleParams& params, const core::EnvConditions& env) {
    const double v_rel = v + wind;
    return params.mass_factor * params.mass_kg * dvdt +
           params.mass_kg * env.gravity * (params.rolling_resist_coeff + grade) +
           0.5 * env.air_density * params.drag_coeff * params.frontal_area_m2 * v_rel * v_rel;
}

double drive_power_W(double v, double dvdt, double grade, double wind, double aux_W,
                     const core::VehicleParams& params, const core::EnvConditions& env) {
    if (!(v >= 0.0)) {
        throw std::invalid_argument("drive_power_W: v must be >= 0");
    }
    const double demand = tractive_demand_N(v, dvdt, grade, wind, params, env);
    const double accessories = aux_W + params.accessory_base_W;
    if (demand >= 0.0) {
        return v / (params.trans_eff * params.elec_eff) * demand + accessories;
    }
    return regen_fraction(v) * v * params.trans_eff * params.motor_eff * demand + accessories;
}

double ground_truth_power(double v, double dvdt, double grade, double wind, double aux_W,
                          double temp_C, double soc_pct, const core::VehicleParams& params,
                          const core::EnvConditions& env, const DeratingSpec* derate) {
    params.validate();
    const double p = drive_power_W(v, dvdt, grade, wind, aux_W, params, env);
    if (derate == nullptr) return p;
    const double cap = max_discharge_W(temp_C, soc_pct, params, *derate);
    return std::min(p, cap);
}

}  // namespace evrk::simgen
