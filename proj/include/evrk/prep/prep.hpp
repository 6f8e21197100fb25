// Window partitioning, the 10 Hz → 1 Hz re-sampler, and grade recovery.
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "evrk/core/types.hpp"

namespace evrk::prep {

// Aligned raw 10 Hz channels ready for partitioning.
struct RawChannels {
    Eigen::VectorXd veh_sp;   // m/s
    Eigen::VectorXd road_el;  // m
    Eigen::VectorXd veh_acc;  // m/s^2
    Eigen::VectorXd aux_ld;   // W
    Eigen::VectorXd wind_sp;  // m/s
    double env_temp = 15.0;   // degC, constant over the series
    double batt_soc = 100.0;  // %, value at the series start
    Eigen::VectorXd act_pow;  // W at 10 Hz; empty when targets are absent
    Eigen::VectorXd soc_trace;  // % at 10 Hz; empty → batt_soc used for every window
};

// Consecutive non-overlapping 100-sample windows; incomplete tail dropped.
// Window targets are per-second means of the 10 Hz act_pow samples.
// Throws std::invalid_argument on channel length mismatch.
[[nodiscard]] std::vector<core::PartitionedWindow> partition(const RawChannels& raw);

// One window resampled to 1 Hz: 10 rows × 7 columns in channel order
// veh_sp, road_el, veh_acc, aux_ld, wind_sp, env_temp, batt_soc.
// Varying channels carry per-second means; scalars repeat.
[[nodiscard]] Eigen::Matrix<double, 10, 7> resample_window(const core::PartitionedWindow& w);

// Recovers per-sample grade from an elevation trace: the generator integrates
// rise = grade · v · dt, so grade_i = (el_i − el_{i−1}) / (v_i · dt) wherever
// the vehicle moves, and 0 where v ≈ 0 (grade is power-irrelevant at rest).
// grade_0 = 0 by convention.
[[nodiscard]] Eigen::VectorXd grade_from_elevation(const Eigen::VectorXd& elevation_m,
                                                   const Eigen::VectorXd& speed_mps,
                                                   double sample_rate_hz);

// Per-channel min/max over the varying channels, scalars, and targets of a
// training split. Degenerate channels (max == min) are recorded as-is.
[[nodiscard]] NormalizationParams fit_normalization(const core::Dataset& train);

}  // namespace evrk::prep
