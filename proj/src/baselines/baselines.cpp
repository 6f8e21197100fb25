#include "evrk/baselines/baselines.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "evrk/pce/arch.hpp"
#include "evrk/prep/prep.hpp"
#include "evrk/simgen/power_model.hpp"

namespace evrk::baselines {
namespace {

constexpr double kStoppedSpeed = 0.01;   // m/s: below this the vehicle is at rest
constexpr double kCruiseAccel = 0.1;     // m/s^2: |a| below this counts as cruising

struct MeanVar {
    double mean = 0.0;
    double var = 0.0;  // population variance
};

MeanVar mean_var(const std::vector<double>& xs) {
    if (xs.empty()) return {};
    double sum = 0.0;
    for (double x : xs) sum += x;
    const double mean = sum / static_cast<double>(xs.size());
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    return {mean, acc / static_cast<double>(xs.size())};
}

}  // namespace

double galvin_power(double v_mps, double a_mps2) {
    if (!std::isfinite(v_mps) || !std::isfinite(a_mps2)) {
        throw std::invalid_argument("galvin_power: non-finite input");
    }
    const double v = v_mps;
    return 479.1 * v - 18.93 * v * v + 0.7876 * v * v * v + 1507.0 * v * a_mps2;
}

double yang_power(double v_mps, double dvdt_mps2, double grade,
                  const core::VehicleParams& params, const core::EnvConditions& env,
                  double p_accessory_W) {
    core::VehicleParams fixed = params;
    fixed.mass_factor = 1.1;
    fixed.trans_eff = 0.9;
    fixed.motor_eff = 0.9;
    fixed.elec_eff = 0.8;
    fixed.rolling_resist_coeff = 0.015;
    core::EnvConditions air = env;
    air.air_density = 1.2;
    return simgen::drive_power_W(v_mps, dvdt_mps2, grade, /*wind=*/0.0, p_accessory_W,
                                 fixed, air);
}

TractiveBreakdown tractive_effort(double v_mps, double dvdt_mps2, double grade,
                                  double wind_mps, const core::VehicleParams& params,
                                  const core::EnvConditions& env) {
    if (!std::isfinite(v_mps) || !std::isfinite(dvdt_mps2) || !std::isfinite(grade) ||
        !std::isfinite(wind_mps)) {
        throw std::invalid_argument("tractive_effort: non-finite input");
    }
    const double v_rel = v_mps + wind_mps;
    TractiveBreakdown b;
    b.f_ad = 0.5 * env.air_density * params.drag_coeff * params.frontal_area_m2 *
             v_rel * v_rel;
    b.f_rr = v_mps > 0.0
                 ? params.mass_kg * env.gravity * params.rolling_resist_coeff
                 : 0.0;
    b.f_hc = params.mass_kg * env.gravity * grade;
    b.f_la = params.mass_kg * dvdt_mps2;
    b.f_wa = (params.mass_factor - 1.0) * params.mass_kg * dvdt_mps2;
    b.t_eff = b.f_ad + b.f_rr + b.f_hc + b.f_la + b.f_wa;
    return b;
}

TripStats alvarez_features(const core::TimeSeries& speed) {
    const auto n = speed.size();
    if (n < 3) throw std::invalid_argument("alvarez_features: cycle shorter than 3 samples");
    const double rate = speed.sample_rate_hz();
    const Eigen::VectorXd& v = speed.values();

    // Backward-difference acceleration a[i] over samples 1..n-1 and jerk
    // j[i] over samples 2..n-1; indices below refer to the sample carrying
    // the value.
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 1; i < n; ++i) a[i] = (v[i] - v[i - 1]) * rate;
    Eigen::VectorXd jerk = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 2; i < n; ++i) jerk[i] = (a[i] - a[i - 1]) * rate;

    const auto stopped = [&](Eigen::Index i) { return v[i] < kStoppedSpeed; };

    // Segment classes over sample indices.  Convention (a documented
    // stand-in; the source technique does not define the boundaries):
    //   EBJ: the trip-final maximal deceleration run ending at the last
    //        moving sample;
    //   SBJ: every other deceleration run that ends in a stop;
    //   SMJ: acceleration runs leaving a stop;
    //   CTJ: moving samples with |a| < 0.1 m/s^2 in no other class.
    enum class Cls : unsigned char { None, Smj, Sbj, Ctj, Ebj };
    std::vector<Cls> cls(static_cast<std::size_t>(n), Cls::None);

    Eigen::Index last_moving = -1;
    for (Eigen::Index i = n - 1; i >= 0; --i) {
        if (!stopped(i)) {
            last_moving = i;
            break;
        }
    }
    if (last_moving > 0) {
        Eigen::Index s = last_moving;
        while (s >= 1 && a[s] < 0.0) --s;
        for (Eigen::Index i = s + 1; i <= last_moving; ++i) {
            cls[static_cast<std::size_t>(i)] = Cls::Ebj;
        }
    }
    for (Eigen::Index i = 1; i < n; ++i) {
        if (stopped(i - 1) && !stopped(i)) {  // movement onset
            Eigen::Index e = i;
            while (e < n && a[e] > 0.0) {
                if (cls[static_cast<std::size_t>(e)] == Cls::None) {
                    cls[static_cast<std::size_t>(e)] = Cls::Smj;
                }
                ++e;
            }
        }
        if (!stopped(i - 1) && stopped(i)) {  // came to rest at i
            Eigen::Index s = i - 1;
            while (s >= 1 && a[s] < 0.0) --s;
            for (Eigen::Index k = s + 1; k <= i - 1; ++k) {
                if (cls[static_cast<std::size_t>(k)] == Cls::None) {
                    cls[static_cast<std::size_t>(k)] = Cls::Sbj;
                }
            }
        }
    }
    for (Eigen::Index i = 1; i < n; ++i) {
        if (!stopped(i) && std::abs(a[i]) < kCruiseAccel &&
            cls[static_cast<std::size_t>(i)] == Cls::None) {
            cls[static_cast<std::size_t>(i)] = Cls::Ctj;
        }
    }

    std::vector<double> speeds, pos_a, neg_a, smj, sbj, ctj, ebj;
    speeds.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) speeds.push_back(v[i]);
    for (Eigen::Index i = 1; i < n; ++i) {
        if (a[i] > 0.0) pos_a.push_back(a[i]);
        if (a[i] < 0.0) neg_a.push_back(a[i]);
    }
    for (Eigen::Index i = 2; i < n; ++i) {
        switch (cls[static_cast<std::size_t>(i)]) {
            case Cls::Smj: smj.push_back(jerk[i]); break;
            case Cls::Sbj: sbj.push_back(jerk[i]); break;
            case Cls::Ctj: ctj.push_back(jerk[i]); break;
            case Cls::Ebj: ebj.push_back(jerk[i]); break;
            case Cls::None: break;
        }
    }

    TripStats stats;
    const std::array<MeanVar, 7> mv = {
        mean_var(speeds), mean_var(pos_a), mean_var(neg_a), mean_var(smj),
        mean_var(sbj),    mean_var(ctj),   mean_var(ebj),
    };
    for (std::size_t q = 0; q < mv.size(); ++q) {
        stats.values[2 * q] = mv[q].mean;
        stats.values[2 * q + 1] = mv[q].var;
    }
    return stats;
}

AffineTripModel alvarez_fit(const std::vector<TripStats>& trips,
                            const Eigen::VectorXd& energies_J,
                            const AffineFitOptions& opts) {
    const auto n = static_cast<Eigen::Index>(trips.size());
    if (n == 0) throw std::invalid_argument("alvarez_fit: no trips");
    if (n != energies_J.size()) {
        throw std::invalid_argument("alvarez_fit: trip/energy count mismatch");
    }
    constexpr Eigen::Index d = 14;

    Eigen::MatrixXd x(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index f = 0; f < d; ++f) {
            x(i, f) = trips[static_cast<std::size_t>(i)]
                          .values[static_cast<std::size_t>(f)];
        }
    }

    AffineTripModel model;
    model.underdetermined = n < d + 1;
    model.feat_mean = x.colwise().mean();
    model.feat_scale.resize(d);
    for (Eigen::Index f = 0; f < d; ++f) {
        const double var = (x.col(f).array() - model.feat_mean[f]).square().mean();
        const double sd = std::sqrt(var);
        model.feat_scale[f] = sd > 0.0 ? sd : 1.0;
    }
    Eigen::MatrixXd z = x;
    for (Eigen::Index f = 0; f < d; ++f) {
        z.col(f) = (z.col(f).array() - model.feat_mean[f]) / model.feat_scale[f];
    }
    model.target_mean = energies_J.mean();
    {
        const double var = (energies_J.array() - model.target_mean).square().mean();
        const double sd = std::sqrt(var);
        model.target_scale = sd > 0.0 ? sd : 1.0;
    }
    const Eigen::VectorXd yz =
        (energies_J.array() - model.target_mean) / model.target_scale;

    // theta = [weights; bias], optimized exactly like the CNN parameters.
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(d + 1);
    pce::AdamState adam(d + 1);
    adam.alpha = opts.learning_rate;
    Eigen::VectorXd grad(d + 1);
    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        const Eigen::VectorXd err =
            z * theta.head(d) + Eigen::VectorXd::Constant(n, theta[d]) - yz;
        grad.head(d) = 2.0 / static_cast<double>(n) * (z.transpose() * err);
        grad[d] = 2.0 / static_cast<double>(n) * err.sum();
        pce::adam_step(theta, grad, adam);
    }
    model.weights = theta.head(d);
    model.bias = theta[d];
    return model;
}

double alvarez_predict(const AffineTripModel& model, const TripStats& stats) {
    if (model.weights.size() != 14) {
        throw std::invalid_argument("alvarez_predict: untrained model");
    }
    double z_dot = model.bias;
    for (Eigen::Index f = 0; f < 14; ++f) {
        const double z = (stats.values[static_cast<std::size_t>(f)] - model.feat_mean[f]) /
                         model.feat_scale[f];
        z_dot += model.weights[f] * z;
    }
    return z_dot * model.target_scale + model.target_mean;
}

std::pair<Eigen::VectorXd, double> alvarez_raw_map(const AffineTripModel& model) {
    Eigen::VectorXd slopes(14);
    double intercept = model.target_mean + model.target_scale * model.bias;
    for (Eigen::Index f = 0; f < 14; ++f) {
        slopes[f] = model.weights[f] * model.target_scale / model.feat_scale[f];
        intercept -= slopes[f] * model.feat_mean[f];
    }
    return {slopes, intercept};
}

pce::ArchDescriptor modi_arch() {
    pce::ArchDescriptor arch;
    arch.blocks = 3;
    arch.append_scalars = false;
    return arch;
}

namespace {

Eigen::VectorXd window_effort(const core::PartitionedWindow& w,
                              const core::VehicleParams& params,
                              const core::EnvConditions& env) {
    const Eigen::VectorXd grade =
        prep::grade_from_elevation(w.road_el, w.veh_sp, core::kRawRateHz);
    Eigen::VectorXd t_eff(w.veh_sp.size());
    for (Eigen::Index i = 0; i < w.veh_sp.size(); ++i) {
        t_eff[i] =
            tractive_effort(w.veh_sp[i], w.veh_acc[i], grade[i], 0.0, params, env).t_eff;
    }
    return t_eff;
}

}  // namespace

pce::NormalizedSample make_modi_sample(const core::PartitionedWindow& w,
                                       const prep::NormalizationParams& norm, bool labeled,
                                       const core::VehicleParams& params,
                                       const core::EnvConditions& env) {
    const auto check = core::validate_window(w);
    if (!check) {
        throw std::invalid_argument("make_modi_sample: invalid window: " + check.violation);
    }
    pce::NormalizedSample s;
    s.channels.resize(3, w.veh_sp.size());
    s.channels.row(0) = prep::normalize(w.road_el, norm.at(prep::Channel::RoadEl))
                            .values.transpose();
    s.channels.row(1) =
        prep::normalize(w.veh_sp, norm.at(prep::Channel::VehSp)).values.transpose();
    s.channels.row(2) = prep::normalize(window_effort(w, params, env),
                                        norm.at(prep::Channel::TractiveEffort))
                            .values.transpose();
    if (labeled) {
        if (!w.act_pow) {
            throw std::invalid_argument("make_modi_sample: window has no targets");
        }
        s.target =
            prep::normalize(*w.act_pow, norm.at(prep::Channel::ActPow)).values;
    }
    return s;
}

prep::ChannelBounds fit_effort_bounds(const core::Dataset& train,
                                      const core::VehicleParams& params,
                                      const core::EnvConditions& env) {
    if (train.windows.empty()) {
        throw std::invalid_argument("fit_effort_bounds: empty dataset");
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& w : train.windows) {
        const Eigen::VectorXd t_eff = window_effort(w, params, env);
        lo = std::min(lo, t_eff.minCoeff());
        hi = std::max(hi, t_eff.maxCoeff());
    }
    return prep::ChannelBounds{prep::Channel::TractiveEffort, lo, hi};
}

}  // namespace evrk::baselines
