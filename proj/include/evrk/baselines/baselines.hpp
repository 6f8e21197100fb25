#pragma once

// Comparison techniques the proposed pipeline is benchmarked against:
//   - galvin:  cubic-in-speed regression with a speed-acceleration cross term
//   - yang:    longitudinal-dynamics power model with fixed published constants
//   - alvarez: trip-level affine model over 14 drive-cycle statistics
//   - modi:    3-channel variant of the convolutional estimator fed road
//              elevation, vehicle speed, and tractive effort only

#include <Eigen/Dense>
#include <array>
#include <utility>
#include <vector>

#include "evrk/core/types.hpp"
#include "evrk/pce/model.hpp"
#include "evrk/prep/normalize.hpp"

namespace evrk::baselines {

// 479.1·V − 18.93·V² + 0.7876·V³ + 1507·V·A  [W]; every term carries V, so
// power is 0 at rest regardless of acceleration.
[[nodiscard]] double galvin_power(double v_mps, double a_mps2);

// Longitudinal-dynamics battery power with this technique's fixed constants
// (mass factor 1.1, air density 1.2 kg/m³, transmission/motor efficiency 0.9,
// electrical efficiency 0.8, rolling coefficient 0.015), no wind, drive and
// regeneration branches selected by the sign of the tractive demand.  Shares
// the power-model implementation, so with derating disabled the two are
// bit-identical.  Mass, frontal area, drag coefficient, and gravity still
// come from the caller's params/env.
[[nodiscard]] double yang_power(double v_mps, double dvdt_mps2, double grade,
                                const core::VehicleParams& params,
                                const core::EnvConditions& env, double p_accessory_W);

struct TractiveBreakdown {
    double f_ad = 0.0;   // aerodynamic drag, from relative air speed
    double f_rr = 0.0;   // rolling resistance (0 at standstill by convention)
    double f_hc = 0.0;   // hill climb
    double f_la = 0.0;   // linear acceleration
    double f_wa = 0.0;   // rotational-inertia acceleration
    double t_eff = 0.0;  // exact sum of the five components
};

[[nodiscard]] TractiveBreakdown tractive_effort(double v_mps, double dvdt_mps2, double grade,
                                                double wind_mps,
                                                const core::VehicleParams& params,
                                                const core::EnvConditions& env);

// Fourteen drive-cycle statistics in fixed order: mean and variance
// (population) of speed, positive acceleration, negative acceleration, and
// jerk within four segment classes — movement-start (SMJ), braking-to-stop
// (SBJ), cruising (CTJ), and the trip-final deceleration (EBJ).  The
// segmentation convention is documented in the implementation and is a
// stand-in (the source technique leaves the boundaries undefined); reports
// must label it as such.  Empty classes contribute zeros.
struct TripStats {
    std::array<double, 14> values{};

    static constexpr std::array<const char*, 14> kNames = {
        "mean_speed",     "var_speed",     "mean_pos_accel", "var_pos_accel",
        "mean_neg_accel", "var_neg_accel", "mean_smj",       "var_smj",
        "mean_sbj",       "var_sbj",       "mean_ctj",       "var_ctj",
        "mean_ebj",       "var_ebj",
    };
};

// Throws std::invalid_argument on cycles shorter than 3 samples.
[[nodiscard]] TripStats alvarez_features(const core::TimeSeries& speed);

// Trip-level affine model: energy = (w·z + b)·target_scale + target_mean over
// standardized statistics z.
struct AffineTripModel {
    Eigen::VectorXd weights;    // 14, on standardized features
    double bias = 0.0;
    Eigen::VectorXd feat_mean;  // standardization applied before the dot product
    Eigen::VectorXd feat_scale;
    double target_mean = 0.0;   // energies are standardized the same way
    double target_scale = 1.0;
    bool underdetermined = false;  // fewer trips than parameters; flagged, not rejected
};

struct AffineFitOptions {
    int epochs = 4000;
    double learning_rate = 0.01;
};

// Fits the 14+1 affine map with the same optimizer machinery as the CNN
// (MSE objective, Adam steps, full batch).  Targets are whole-trip energies
// in joules.  Throws std::invalid_argument on empty or mismatched inputs.
[[nodiscard]] AffineTripModel alvarez_fit(const std::vector<TripStats>& trips,
                                          const Eigen::VectorXd& energies_J,
                                          const AffineFitOptions& opts = {});

[[nodiscard]] double alvarez_predict(const AffineTripModel& model, const TripStats& stats);

// The fitted map expressed on raw (unstandardized) features: 14 slopes and an
// intercept, for audit and planted-model recovery checks.
[[nodiscard]] std::pair<Eigen::VectorXd, double> alvarez_raw_map(const AffineTripModel&);

// 3-channel descriptor for the modi estimator: three feature blocks, no
// appended scalars, flattened length 468.
[[nodiscard]] pce::ArchDescriptor modi_arch();

// Builds the modi sample from a partitioned window: road elevation, vehicle
// speed, and tractive effort computed per sample from the window's own
// channels (grade recovered from elevation, wind excluded by construction).
// Requires normalization bounds for RoadEl, VehSp, TractiveEffort, and (when
// labeled) ActPow.
[[nodiscard]] pce::NormalizedSample make_modi_sample(const core::PartitionedWindow& w,
                                                     const prep::NormalizationParams& norm,
                                                     bool labeled,
                                                     const core::VehicleParams& params,
                                                     const core::EnvConditions& env);

// Tractive-effort normalization bounds fitted over a dataset's windows.
[[nodiscard]] prep::ChannelBounds fit_effort_bounds(const core::Dataset& train,
                                                    const core::VehicleParams& params,
                                                    const core::EnvConditions& env);

}  // namespace evrk::baselines
