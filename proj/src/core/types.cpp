#include "evrk/core/types.hpp"

#include <cmath>

namespace evrk::core {

const char* unit_name(Unit u) {
    switch (u) {
        case Unit::MetersPerSecond: return "m/s";
        case Unit::MetersPerSecond2: return "m/s^2";
        case Unit::Percent: return "%";
        case Unit::Watt: return "W";
        case Unit::Celsius: return "degC";
        case Unit::Meter: return "m";
    }
    return "?";
}

TimeSeries::TimeSeries(Eigen::VectorXd values, double sample_rate_hz, Unit unit)
    : values_(std::move(values)), sample_rate_hz_(sample_rate_hz), unit_(unit) {
    if (values_.size() == 0) {
        throw std::invalid_argument("TimeSeries: values must be non-empty");
    }
    if (!(sample_rate_hz_ > 0.0) || !std::isfinite(sample_rate_hz_)) {
        throw std::invalid_argument("TimeSeries: sample_rate_hz must be positive and finite");
    }
    if (!values_.allFinite()) {
        throw std::invalid_argument("TimeSeries: non-finite value present");
    }
}

ValidationResult validate_window(const PartitionedWindow& w) {
    const Eigen::VectorXd* channels[] = {&w.veh_sp, &w.road_el, &w.veh_acc, &w.aux_ld, &w.wind_sp};
    for (const auto* ch : channels) {
        if (ch->size() != kWindowSamples) {
            return {false, "channel length"};
        }
    }
    if (w.act_pow && w.act_pow->size() != kWindowSeconds) {
        return {false, "target length"};
    }
    if (!(w.batt_soc >= 0.0 && w.batt_soc <= 100.0)) {
        return {false, "soc range"};
    }
    for (const auto* ch : channels) {
        if (!ch->allFinite()) {
            return {false, "non-finite"};
        }
    }
    if (!std::isfinite(w.env_temp) || !std::isfinite(w.batt_soc)) {
        return {false, "non-finite"};
    }
    if (w.act_pow && !w.act_pow->allFinite()) {
        return {false, "non-finite"};
    }
    return {};
}

void VehicleParams::validate() const {
    auto in_unit = [](double v) { return v > 0.0 && v <= 1.0; };
    if (!(mass_kg > 0.0) || !std::isfinite(mass_kg)) {
        throw std::invalid_argument("VehicleParams: mass_kg must be positive");
    }
    if (!(frontal_area_m2 > 0.0) || !std::isfinite(frontal_area_m2)) {
        throw std::invalid_argument("VehicleParams: frontal_area_m2 must be positive");
    }
    if (!(drag_coeff > 0.0) || !std::isfinite(drag_coeff)) {
        throw std::invalid_argument("VehicleParams: drag_coeff must be positive");
    }
    if (!std::isfinite(rolling_resist_coeff) || rolling_resist_coeff < 0.0) {
        throw std::invalid_argument("VehicleParams: rolling_resist_coeff must be >= 0");
    }
    if (!(mass_factor >= 1.0) || !std::isfinite(mass_factor)) {
        throw std::invalid_argument("VehicleParams: mass_factor must be >= 1");
    }
    if (!in_unit(trans_eff) || !in_unit(motor_eff) || !in_unit(elec_eff)) {
        throw std::invalid_argument("VehicleParams: efficiencies must lie in (0,1]");
    }
    if (!(battery_capacity_J > 0.0) || !std::isfinite(battery_capacity_J)) {
        throw std::invalid_argument("VehicleParams: battery_capacity_J must be positive");
    }
    if (!std::isfinite(accessory_base_W) || accessory_base_W < 0.0) {
        throw std::invalid_argument("VehicleParams: accessory_base_W must be >= 0");
    }
    if (!(rated_power_W > 0.0) || !std::isfinite(rated_power_W)) {
        throw std::invalid_argument("VehicleParams: rated_power_W must be positive");
    }
}

void EnvConditions::validate() const {
    if (!(air_density > 0.0) || !std::isfinite(air_density)) {
        throw std::invalid_argument("EnvConditions: air_density must be positive");
    }
    if (!(gravity > 0.0) || !std::isfinite(gravity)) {
        throw std::invalid_argument("EnvConditions: gravity must be positive");
    }
    for (Eigen::Index i = 0; i < grade_profile.size(); ++i) {
        const double g = grade_profile[i];
        if (!std::isfinite(g) || g < -0.25 || g > 0.25) {
            throw std::invalid_argument("EnvConditions: grade values must lie in [-0.25, 0.25]");
        }
    }
    if (!wind_profile.allFinite()) {
        throw std::invalid_argument("EnvConditions: wind profile must be finite");
    }
    if (!std::isfinite(temp_C)) {
        throw std::invalid_argument("EnvConditions: temp_C must be finite");
    }
}

}  // namespace evrk::core
