#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "evrk/baselines/baselines.hpp"
#include "evrk/core/rng.hpp"
#include "evrk/pce/model.hpp"
#include "evrk/prep/prep.hpp"
#include "evrk/simgen/power_model.hpp"

using namespace evrk;
using Eigen::VectorXd;

namespace {

core::TimeSeries speed_series(const std::vector<double>& v, double rate = 1.0) {
    return core::TimeSeries(
        Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())),
        rate, core::Unit::MetersPerSecond);
}

}  // namespace

TEST_CASE("cubic speed regression: hand values and structure") {
    CHECK(baselines::galvin_power(0.0, 0.0) == 0.0);
    CHECK(baselines::galvin_power(0.0, 3.0) == 0.0);  // every term carries V
    CHECK(baselines::galvin_power(1.0, 0.0) == doctest::Approx(460.9576).epsilon(1e-12));
    CHECK(baselines::galvin_power(10.0, 1.0) == doctest::Approx(18755.6).epsilon(1e-12));
    // the acceleration enters only through the 1507·V·A cross term
    const double with_a = baselines::galvin_power(7.0, 1.3);
    const double without = baselines::galvin_power(7.0, 0.0);
    CHECK(with_a - without == doctest::Approx(1507.0 * 7.0 * 1.3).epsilon(1e-12));
    CHECK_THROWS_AS((void)baselines::galvin_power(
                        std::numeric_limits<double>::quiet_NaN(), 0.0),
                    std::invalid_argument);
}

TEST_CASE("dynamics baseline: rest, hand value, sign, and shared-model identity") {
    core::VehicleParams params;
    core::EnvConditions env;

    // rest: motive power zero, accessory passes through
    CHECK(baselines::yang_power(0.0, 0.0, 0.0, params, env, 500.0) == 500.0);

    // steady 10 m/s on the flat, no accessories:
    //   demand = 1521·9.81·0.015 + (1.2·0.28·2.27/2)·10² = 261.95115 N
    //   power  = 10/(0.9·0.8) · demand = 3638.21041666… W
    const double p10 = baselines::yang_power(10.0, 0.0, 0.0, params, env, 0.0);
    CHECK(p10 == doctest::Approx(3638.2104166666667).epsilon(1e-12));

    // steep descent at speed: regeneration makes battery power negative
    CHECK(baselines::yang_power(20.0, 0.0, -0.1, params, env, 0.0) < 0.0);

    // with the fixed constants substituted into params/env the baseline is
    // bit-identical to the underived shared power model
    core::VehicleParams fixed = params;
    fixed.mass_factor = 1.1;
    fixed.trans_eff = 0.9;
    fixed.motor_eff = 0.9;
    fixed.elec_eff = 0.8;
    fixed.rolling_resist_coeff = 0.015;
    core::EnvConditions air = env;
    air.air_density = 1.2;
    core::Engine rng(314);
    std::uniform_real_distribution<double> uv(0.0, 30.0), ua(-3.0, 3.0),
        ug(-0.12, 0.12), ux(0.0, 1500.0);
    for (int i = 0; i < 200; ++i) {
        const double v = uv(rng), a = ua(rng), g = ug(rng), aux = ux(rng);
        const double lhs = baselines::yang_power(v, a, g, params, env, aux);
        const double rhs = simgen::ground_truth_power(v, a, g, /*wind=*/0.0, aux,
                                                      /*temp=*/25.0, /*soc=*/80.0,
                                                      fixed, air, /*derate=*/nullptr);
        CHECK(lhs == rhs);
    }
}

TEST_CASE("tractive effort: null cases, exact sum, hand oracle") {
    core::VehicleParams params;
    core::EnvConditions env;

    const auto rest = baselines::tractive_effort(0.0, 0.0, 0.0, 0.0, params, env);
    CHECK(rest.f_ad == 0.0);
    CHECK(rest.f_rr == 0.0);  // standstill convention
    CHECK(rest.f_hc == 0.0);
    CHECK(rest.f_la == 0.0);
    CHECK(rest.f_wa == 0.0);
    CHECK(rest.t_eff == 0.0);

    // headwind alone still produces drag (relative air speed)
    const auto windy = baselines::tractive_effort(0.0, 0.0, 0.0, 5.0, params, env);
    CHECK(windy.f_ad ==
          doctest::Approx(0.5 * env.air_density * params.drag_coeff *
                          params.frontal_area_m2 * 25.0)
              .epsilon(1e-15));
    CHECK(windy.f_rr == 0.0);

    const auto b = baselines::tractive_effort(10.0, 0.5, 0.02, 2.0, params, env);
    CHECK(b.f_ad == doctest::Approx(0.5 * 1.225 * 0.28 * 2.27 * 144.0).epsilon(1e-12));
    CHECK(b.f_rr == doctest::Approx(1521.0 * 9.81 * 0.015).epsilon(1e-12));
    CHECK(b.f_hc == doctest::Approx(1521.0 * 9.81 * 0.02).epsilon(1e-12));
    CHECK(b.f_la == doctest::Approx(1521.0 * 0.5).epsilon(1e-12));
    CHECK(b.f_wa == doctest::Approx(0.1 * 1521.0 * 0.5).epsilon(1e-9));
    CHECK(b.t_eff == b.f_ad + b.f_rr + b.f_hc + b.f_la + b.f_wa);  // exact sum

    // a 10% grade dominates rolling and drag at town speeds
    const auto hill = baselines::tractive_effort(5.0, 0.0, 0.10, 0.0, params, env);
    CHECK(hill.f_hc > hill.f_rr + hill.f_ad);
}

TEST_CASE("trip statistics: constant cruise is all zeros beyond speed") {
    const auto s = baselines::alvarez_features(speed_series(std::vector<double>(40, 15.0)));
    CHECK(s.values[0] == doctest::Approx(15.0).epsilon(1e-15));
    for (std::size_t i = 1; i < 14; ++i) CHECK(s.values[i] == 0.0);
}

TEST_CASE("trip statistics: symmetric triangle balances accelerations") {
    std::vector<double> v;
    for (int i = 0; i <= 5; ++i) v.push_back(i);        // 0..5, a = +1
    for (int i = 4; i >= 0; --i) v.push_back(i);        // back down, a = −1
    const auto s = baselines::alvarez_features(speed_series(v));
    CHECK(s.values[2] == doctest::Approx(1.0).epsilon(1e-15));   // mean pos accel
    CHECK(s.values[4] == doctest::Approx(-1.0).epsilon(1e-15));  // mean neg accel
    CHECK(s.values[3] == 0.0);
    CHECK(s.values[5] == 0.0);
}

TEST_CASE("trip statistics: hand-segmented stop-and-go fixture") {
    // 30 samples at 1 Hz: stop, ramp to 5, cruise, brake to a stop, stop,
    // sharper ramp, and a final deceleration that never quite stops.
    std::vector<double> v = {0,   0, 0,   0, 0,                      // 0-4
                             1,   2, 3,   4, 5,                      // 5-9   a=+1
                             5,   5, 5,   5, 5,                      // 10-14 cruise
                             4,   3, 2,   1, 0,                      // 15-19 a=−1
                             0,   0, 0,                              // 20-22
                             1.5, 3, 4.5, 6,                         // 23-26 a=+1.5
                             4,   2, 0.5};                           // 27-29 ending run
    const auto s = baselines::alvarez_features(speed_series(v));

    CHECK(s.values[0] == doctest::Approx(71.5 / 30.0).epsilon(1e-12));   // mean speed
    CHECK(s.values[2] == doctest::Approx(11.0 / 9.0).epsilon(1e-12));    // mean pos a
    CHECK(s.values[4] == doctest::Approx(-1.3125).epsilon(1e-12));       // mean neg a

    // movement-start jerks: onsets at 5 and 23 → [1,0,0,0,0, 1.5,0,0,0]
    CHECK(s.values[6] == doctest::Approx(5.0 / 18.0).epsilon(1e-12));
    CHECK(s.values[7] == doctest::Approx(23.0 / 81.0).epsilon(1e-12));
    // braking-to-stop jerks: samples 15-18 → [−1,0,0,0]
    CHECK(s.values[8] == doctest::Approx(-0.25).epsilon(1e-12));
    CHECK(s.values[9] == doctest::Approx(0.1875).epsilon(1e-12));
    // cruising jerks: samples 10-14 → [−1,0,0,0,0]
    CHECK(s.values[10] == doctest::Approx(-0.2).epsilon(1e-12));
    CHECK(s.values[11] == doctest::Approx(0.16).epsilon(1e-12));
    // trip-final deceleration: samples 27-29 → [−3.5, 0, 0.5]
    CHECK(s.values[12] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(s.values[13] == doctest::Approx(9.5 / 3.0).epsilon(1e-12));
}

TEST_CASE("trip statistics reject too-short cycles") {
    CHECK_THROWS_AS((void)baselines::alvarez_features(speed_series({1.0, 2.0})),
                    std::invalid_argument);
}

TEST_CASE("affine trip model recovers a planted map") {
    core::Engine rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    VectorXd true_slopes(14);
    for (int f = 0; f < 14; ++f) {
        true_slopes[f] = 1000.0 * (f + 1) * (f % 2 == 0 ? 1.0 : -1.0);
    }
    const double true_intercept = 5.0e5;

    const int n = 30;
    std::vector<baselines::TripStats> trips(n);
    VectorXd energies(n);
    for (int i = 0; i < n; ++i) {
        double e = true_intercept;
        for (int f = 0; f < 14; ++f) {
            const double x = u(rng) * (f + 1.0);
            trips[static_cast<std::size_t>(i)].values[static_cast<std::size_t>(f)] = x;
            e += true_slopes[f] * x;
        }
        energies[i] = e;
    }

    const auto model = baselines::alvarez_fit(trips, energies);
    CHECK(!model.underdetermined);

    const auto [slopes, intercept] = baselines::alvarez_raw_map(model);
    for (int f = 0; f < 14; ++f) {
        CHECK(slopes[f] ==
              doctest::Approx(true_slopes[f]).epsilon(2e-3));
    }
    CHECK(intercept == doctest::Approx(true_intercept).epsilon(2e-2));

    double worst_rel = 0.0;
    for (int i = 0; i < n; ++i) {
        const double pred =
            baselines::alvarez_predict(model, trips[static_cast<std::size_t>(i)]);
        worst_rel = std::max(worst_rel, std::abs(pred - energies[i]) /
                                            std::abs(energies[i]));
    }
    CHECK(worst_rel < 1e-4);
}

TEST_CASE("affine trip model: constant targets collapse to the bias") {
    std::vector<baselines::TripStats> trips(16);
    core::Engine rng(7);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    for (auto& t : trips) {
        for (auto& x : t.values) x = u(rng);
    }
    const VectorXd energies = VectorXd::Constant(16, 7.5e6);
    const auto model = baselines::alvarez_fit(trips, energies);
    CHECK(model.weights.isZero(0.0));  // zero gradient from the first step
    CHECK(model.bias == 0.0);
    CHECK(baselines::alvarez_predict(model, trips[3]) == 7.5e6);
}

TEST_CASE("affine trip model flags underdetermined fits and validates input") {
    std::vector<baselines::TripStats> five(5);
    for (std::size_t i = 0; i < five.size(); ++i) five[i].values[0] = double(i);
    const auto model =
        baselines::alvarez_fit(five, VectorXd::LinSpaced(5, 1.0, 5.0),
                               baselines::AffineFitOptions{10, 0.01});
    CHECK(model.underdetermined);

    std::vector<baselines::TripStats> fifteen(15);
    for (std::size_t i = 0; i < fifteen.size(); ++i) fifteen[i].values[0] = double(i);
    CHECK(!baselines::alvarez_fit(fifteen, VectorXd::LinSpaced(15, 1.0, 15.0),
                                  baselines::AffineFitOptions{10, 0.01})
               .underdetermined);

    CHECK_THROWS_AS((void)baselines::alvarez_fit({}, VectorXd{}), std::invalid_argument);
    CHECK_THROWS_AS((void)baselines::alvarez_fit(five, VectorXd::Zero(4)),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        (void)baselines::alvarez_predict(baselines::AffineTripModel{},
                                         baselines::TripStats{}),
        std::invalid_argument);
}

TEST_CASE("3-channel variant geometry") {
    const auto arch = baselines::modi_arch();
    CHECK(arch.blocks == 3);
    CHECK(!arch.append_scalars);
    CHECK(arch.flatten_len() == 468);
    CHECK(arch.fc_in() == 468);
    const auto ledger = pce::shape_ledger(arch);
    CHECK(ledger.flatten_len == 468);
    CHECK(ledger.fc_in == 468);
    CHECK(ledger.outputs == 10);
}

namespace {

core::PartitionedWindow modi_window(double speed) {
    core::PartitionedWindow w;
    w.veh_sp = VectorXd::Constant(100, speed);
    w.road_el = VectorXd::Constant(100, 80.0);
    w.veh_acc = VectorXd::Zero(100);
    w.aux_ld = VectorXd::Constant(100, 250.0);
    w.wind_sp = VectorXd::Constant(100, 3.0);  // must not leak into the sample
    w.env_temp = 18.0;
    w.batt_soc = 64.0;
    w.act_pow = VectorXd::Constant(10, 2000.0);
    return w;
}

prep::NormalizationParams modi_norm() {
    prep::NormalizationParams norm;
    norm.set(prep::Channel::RoadEl, 0.0, 160.0);
    norm.set(prep::Channel::VehSp, 0.0, 20.0);
    norm.set(prep::Channel::TractiveEffort, 0.0, 2000.0);
    norm.set(prep::Channel::ActPow, 0.0, 8000.0);
    return norm;
}

}  // namespace

TEST_CASE("3-channel sample: channel order, wind exclusion, labels") {
    core::VehicleParams params;
    core::EnvConditions env;
    const auto w = modi_window(10.0);
    const auto norm = modi_norm();

    const auto s = baselines::make_modi_sample(w, norm, /*labeled=*/true, params, env);
    REQUIRE(s.channels.rows() == 3);
    REQUIRE(s.channels.cols() == 100);
    CHECK(s.channels.row(0).isConstant(0.5, 1e-15));   // 80/160
    CHECK(s.channels.row(1).isConstant(0.5, 1e-15));   // 10/20

    // flat road, steady speed: effort = rolling + drag at v_rel = v (wind
    // excluded by construction)
    const double expect_eff =
        baselines::tractive_effort(10.0, 0.0, 0.0, 0.0, params, env).t_eff;
    CHECK(s.channels.row(2).isConstant(expect_eff / 2000.0, 1e-12));

    REQUIRE(s.target.size() == 10);
    CHECK(s.target.isConstant(0.25, 1e-15));  // 2000/8000

    const auto unlabeled =
        baselines::make_modi_sample(w, norm, /*labeled=*/false, params, env);
    CHECK(unlabeled.target.size() == 0);

    core::PartitionedWindow no_target = w;
    no_target.act_pow.reset();
    CHECK_THROWS_AS((void)baselines::make_modi_sample(no_target, norm, true, params, env),
                    std::invalid_argument);

    // zero-parameter 3-channel model maps any sample to the zero vector
    pce::CnnModel model;
    model.arch = baselines::modi_arch();
    model.norm = norm;
    model.params = VectorXd::Zero(model.layout().total());
    const VectorXd out = pce::forward(model, s);
    REQUIRE(out.size() == 10);
    CHECK(out.isZero(0.0));
}

TEST_CASE("effort bounds span the dataset's extremes") {
    core::VehicleParams params;
    core::EnvConditions env;
    core::Dataset data;
    data.windows = {modi_window(5.0), modi_window(15.0)};

    const auto bounds = baselines::fit_effort_bounds(data, params, env);
    CHECK(bounds.channel == prep::Channel::TractiveEffort);
    const double lo = baselines::tractive_effort(5.0, 0.0, 0.0, 0.0, params, env).t_eff;
    const double hi = baselines::tractive_effort(15.0, 0.0, 0.0, 0.0, params, env).t_eff;
    CHECK(bounds.min == doctest::Approx(lo).epsilon(1e-12));
    CHECK(bounds.max == doctest::Approx(hi).epsilon(1e-12));

    CHECK_THROWS_AS((void)baselines::fit_effort_bounds(core::Dataset{}, params, env),
                    std::invalid_argument);
}
