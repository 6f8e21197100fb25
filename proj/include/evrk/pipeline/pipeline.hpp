#pragma once

// End-to-end estimator: CNN power estimate -> 1 Hz re-sampled feature rows ->
// tree-ensemble fine tuning -> battery state-of-charge integration, with the
// running SOC fed back into each successive window.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "evrk/bdt/bdt.hpp"
#include "evrk/core/types.hpp"
#include "evrk/pce/model.hpp"

namespace evrk::pipeline {

struct BatteryState {
    double soc_percent = 100.0;
    double capacity_J = 8.64e7;
    bool saturated = false;  // set when an update had to clamp

    // Throws std::invalid_argument when soc is outside [0,100], capacity is
    // not positive, or either is non-finite.
    void validate() const;
};

// One charge-accounting step over a 1 Hz power vector:
//   soc' = soc − (Σ est_pow · 1 s) / capacity × 100
// clamped to [0,100]; `saturated` is set on the result when clamping bit.
// Negative power (regeneration) raises the SOC symmetrically.
[[nodiscard]] BatteryState soc_update(const BatteryState& state,
                                      const Eigen::VectorXd& est_pow_W);

struct TripEstimate {
    Eigen::VectorXd est_pow_W;     // one value per second
    Eigen::VectorXd cum_energy_J;  // running Σ est_pow · 1 s
    Eigen::VectorXd soc_pct;       // SOC after each second
    double final_soc_pct = 0.0;
    bool soc_saturated = false;    // some window clamped at 0 or 100
};

struct EstimateOptions {
    // When false the tree ensemble is bypassed and the trip estimate is the
    // denormalized CNN output (the --no-finetune ablation).
    bool use_fine_tuner = true;
    // Test hook: when false each window keeps its recorded SOC instead of the
    // fed-back running value, making windows independent and order-invariant.
    bool soc_feedback = true;
    // Battery energy capacity used for the SOC integration.
    double capacity_J = 8.64e7;
};

// Estimates one trip, strictly sequentially: for each window the running SOC
// replaces the recorded one, the CNN runs in inference mode, its denormalized
// estimate joins the seven re-sampled channels as the eighth fine-tuner
// feature, and the fine-tuned (or raw) power updates the battery state.
// The per-second soc trace is the unclamped running integral inside a window;
// window boundaries carry the clamped value that is fed forward.
// fine_tuner may be null only when opts.use_fine_tuner is false.
// Throws std::invalid_argument when windows is empty, the CNN normalization
// lacks a needed channel, or the fine tuner expects a different arity.
[[nodiscard]] TripEstimate estimate_trip(const pce::CnnModel& cnn,
                                         const bdt::BdtModel* fine_tuner,
                                         const std::vector<core::PartitionedWindow>& windows,
                                         double initial_soc_pct,
                                         const EstimateOptions& opts = {});

// Wall-clock seconds (monotonic) for one window's full pipeline pass —
// normalization, CNN forward, feature assembly, fine tuning, SOC update —
// excluding any I/O. Callers aggregate medians over repeated calls.
[[nodiscard]] double estimate_window_latency(const pce::CnnModel& cnn,
                                             const bdt::BdtModel* fine_tuner,
                                             const core::PartitionedWindow& window,
                                             double soc_pct,
                                             const EstimateOptions& opts = {});

// Trip estimate CSV: header `second,est_pow_w,cum_energy_j,soc_pct`, one row
// per second, full round-trip precision.
void write_trip_csv(const std::string& path, const TripEstimate& trip);
[[nodiscard]] TripEstimate read_trip_csv(const std::string& path);

}  // namespace evrk::pipeline
