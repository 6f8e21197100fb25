#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "evrk/prep/normalize.hpp"

namespace evrk::core {

/// Physical unit carried by a TimeSeries. Immutable after construction.
enum class Unit : std::uint8_t {
    MetersPerSecond,
    MetersPerSecond2,
    Percent,
    Watt,
    Celsius,
    Meter,
};

const char* unit_name(Unit u);

/// Uniformly sampled series of one physical quantity. Values are validated
/// (non-empty, finite) at construction and immutable afterwards.
class TimeSeries {
public:
    TimeSeries(Eigen::VectorXd values, double sample_rate_hz, Unit unit);

    const Eigen::VectorXd& values() const noexcept { return values_; }
    double sample_rate_hz() const noexcept { return sample_rate_hz_; }
    Unit unit() const noexcept { return unit_; }
    Eigen::Index size() const noexcept { return values_.size(); }
    double duration_s() const noexcept { return static_cast<double>(values_.size()) / sample_rate_hz_; }

private:
    Eigen::VectorXd values_;
    double sample_rate_hz_;
    Unit unit_;
};

inline constexpr int kWindowSamples = 100;   // 10 s at 10 Hz
inline constexpr int kWindowSeconds = 10;    // 1 Hz rows per window
inline constexpr double kRawRateHz = 10.0;

/// One 10 s, 10 Hz slice of the seven input channels. The five varying
/// channels hold 100 samples each; temperature and SOC are scalars held
/// constant across the window. act_pow, when present, is the 1 Hz training
/// target (10 per-second mean powers, W).
struct PartitionedWindow {
    Eigen::VectorXd veh_sp;    // m/s
    Eigen::VectorXd road_el;   // m
    Eigen::VectorXd veh_acc;   // m/s^2
    Eigen::VectorXd aux_ld;    // W
    Eigen::VectorXd wind_sp;   // m/s
    double env_temp = 0.0;     // degC
    double batt_soc = 0.0;     // % in [0,100]
    std::optional<Eigen::VectorXd> act_pow;  // W, length 10
};

struct ValidationResult {
    bool ok = true;
    std::string violation;  // name of the first violated invariant when !ok

    explicit operator bool() const noexcept { return ok; }
};

/// Checks every PartitionedWindow invariant; reports the first violation
/// by name ("channel length", "soc range", "non-finite", "target length").
ValidationResult validate_window(const PartitionedWindow& w);

/// Physical constants of the modeled vehicle. All SI.
struct VehicleParams {
    double mass_kg = 1521.0;            // m, curb mass + driver
    double frontal_area_m2 = 2.27;      // A
    double drag_coeff = 0.28;           // C_D
    double rolling_resist_coeff = 0.015;  // f
    double mass_factor = 1.1;           // delta, rotational-inertia factor >= 1
    double trans_eff = 0.9;             // eta_te in (0,1]
    double motor_eff = 0.9;             // eta_m in (0,1]
    double elec_eff = 0.8;              // eta_e in (0,1]
    double battery_capacity_J = 8.64e7; // E_cap (24 kWh)
    double accessory_base_W = 0.0;      // always-on accessory draw
    double rated_power_W = 80000.0;     // battery rated discharge power

    void validate() const;
};

/// Exogenous conditions for one simulated trip: scalar air constants plus
/// per-sample grade and wind profiles.
struct EnvConditions {
    double air_density = 1.225;  // rho, kg/m^3
    double gravity = 9.81;       // g, m/s^2
    Eigen::VectorXd grade_profile;  // dimensionless fraction per sample
    Eigen::VectorXd wind_profile;   // m/s per sample
    double temp_C = 15.0;

    void validate() const;
};

/// A bag of windows plus the provenance label and (if fitted) the
/// normalization bounds recorded from the training split.
struct Dataset {
    std::vector<PartitionedWindow> windows;
    std::string provenance;
    // Per-window trip grouping: trip_ids[i] names the drive cycle window i
    // came from; empty means grouping is unknown (single-trip convention).
    std::vector<std::int64_t> trip_ids;
    std::optional<prep::NormalizationParams> norm_params;

    std::size_t size() const noexcept { return windows.size(); }
    bool empty() const noexcept { return windows.empty(); }
};

}  // namespace evrk::core
