#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "evrk/simgen/beaufort.hpp"
#include "evrk/simgen/drive_cycles.hpp"
#include "evrk/simgen/generator.hpp"
#include "evrk/simgen/power_model.hpp"
#include "evrk/simgen/profiles.hpp"

using namespace evrk;

namespace {

// Constants used by the published reference model; the hand-computed power
// values below were derived with exactly these numbers.
core::VehicleParams reference_params() {
    core::VehicleParams p;
    p.mass_kg = 1521.0;
    p.frontal_area_m2 = 2.27;
    p.drag_coeff = 0.28;
    p.rolling_resist_coeff = 0.015;
    p.mass_factor = 1.1;
    p.trans_eff = 0.9;
    p.motor_eff = 0.9;
    p.elec_eff = 0.8;
    return p;
}

core::EnvConditions reference_env() {
    core::EnvConditions env;
    env.air_density = 1.2;
    env.gravity = 9.81;
    return env;
}

simgen::GenerationGrid tiny_grid(double duration_s = 200.0) {
    simgen::DriveCycle cyc;
    cyc.name = "ramp_hold";
    cyc.t_s = Eigen::VectorXd::LinSpaced(2, 0.0, duration_s);
    cyc.v_mps = Eigen::VectorXd::Constant(2, 0.0);
    cyc.t_s << 0.0, duration_s;
    cyc.v_mps << 0.0, 15.0;

    simgen::GenerationGrid grid;
    grid.temps_C = {25.0};
    grid.grade_profiles = {simgen::grade_flat(100)};
    grid.initial_socs = {80.0};
    grid.drive_cycles.push_back({cyc.name, simgen::sample_cycle(cyc, 10.0)});
    grid.wind_profiles.push_back({"calm", Eigen::VectorXd::Constant(100, 0.1)});
    grid.aux_profiles.push_back({"aux", Eigen::VectorXd::Constant(100, 300.0)});
    grid.rng_seed = 42;
    return grid;
}

}  // namespace

TEST_CASE("beaufort classes tile [0, inf) without gaps or overlap") {
    const auto& classes = simgen::beaufort_classes();
    REQUIRE(classes.size() == 13);
    CHECK(classes[0].lo_mps == 0.0);
    for (std::size_t i = 1; i < classes.size(); ++i) {
        CHECK(classes[i].lo_mps == classes[i - 1].hi_mps);
    }
    CHECK(std::isinf(classes[12].hi_mps));
}

TEST_CASE("classify_wind reference points") {
    CHECK(simgen::classify_wind(0.3).name == "Calm");
    CHECK(simgen::classify_wind(12.0).name == "Strong Breeze");
    CHECK(simgen::classify_wind(33.0).name == "Hurricane");
    CHECK(simgen::classify_wind(0.0).name == "Calm");
    // Boundary speeds belong to the class they open.
    CHECK(simgen::classify_wind(0.5).name == "Light Air");
    CHECK(simgen::classify_wind(32.7).name == "Hurricane");
    CHECK_THROWS_AS(simgen::classify_wind(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(simgen::classify_wind(std::nan("")), std::invalid_argument);
}

TEST_CASE("classification is total on a dense sweep") {
    for (double v = 0.0; v < 40.0; v += 0.01) {
        CHECK_NOTHROW(simgen::classify_wind(v));
    }
}

TEST_CASE("regen_fraction branch values and continuity") {
    CHECK(simgen::regen_fraction(0.0) == 0.0);
    CHECK(simgen::regen_fraction(5.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(simgen::regen_fraction(25.0) == doctest::Approx(0.8).epsilon(1e-15));
    const double below = simgen::regen_fraction(5.0 - 1e-9);
    const double above = simgen::regen_fraction(5.0 + 1e-9);
    CHECK(std::abs(above - below) < 1e-8);
    CHECK(simgen::regen_fraction(1000.0) == 1.0);
}

TEST_CASE("steady 10 m/s on flat road draws about 3638 W") {
    const auto p = reference_params();
    const auto env = reference_env();
    const double w = simgen::ground_truth_power(10.0, 0.0, 0.0, 0.0, 0.0, 25.0, 80.0, p, env);
    // B = 1521*9.81*0.015 + 0.5*1.2*0.28*2.27*100 = 223.81515 + 38.1360
    // P = 10/(0.9*0.8) * 261.95115 = 3638.2104166...
    CHECK(w == doctest::Approx(3638.2104166666).epsilon(1e-10));
}

TEST_CASE("at rest only accessories draw power") {
    const auto p = reference_params();
    const auto env = reference_env();
    CHECK(simgen::ground_truth_power(0.0, 0.0, 0.0, 0.0, 0.0, 25.0, 80.0, p, env) == 0.0);
    auto p2 = p;
    p2.accessory_base_W = 120.0;
    CHECK(simgen::ground_truth_power(0.0, 0.0, 0.0, 0.0, 500.0, 25.0, 80.0, p2, env) == 620.0);
}

TEST_CASE("steady downhill charges the battery") {
    const auto p = reference_params();
    const auto env = reference_env();
    const double w = simgen::ground_truth_power(10.0, 0.0, -0.10, 0.0, 0.0, 25.0, 80.0, p, env);
    CHECK(w < 0.0);
}

TEST_CASE("headwind enters the drag term quadratically") {
    const auto p = reference_params();
    const auto env = reference_env();
    const double still = simgen::drive_power_W(10.0, 0.0, 0.0, 0.0, 0.0, p, env);
    const double windy = simgen::drive_power_W(10.0, 0.0, 0.0, 5.0, 0.0, p, env);
    const double extra = 10.0 / (0.9 * 0.8) * 0.5 * 1.2 * 0.28 * 2.27 * (15.0 * 15.0 - 100.0);
    CHECK(windy - still == doctest::Approx(extra).epsilon(1e-12));
}

TEST_CASE("derating factors ramp and clamp") {
    CHECK(simgen::temp_derate_factor(20.0) == 1.0);
    CHECK(simgen::temp_derate_factor(15.0) == 1.0);
    CHECK(simgen::temp_derate_factor(-5.0) == doctest::Approx(0.7));
    CHECK(simgen::temp_derate_factor(-40.0) == doctest::Approx(0.7));
    CHECK(simgen::temp_derate_factor(5.0) == doctest::Approx(0.85));
    CHECK(simgen::soc_derate_factor(70.0) == 1.0);
    CHECK(simgen::soc_derate_factor(10.0) == doctest::Approx(0.6));
    CHECK(simgen::soc_derate_factor(25.0) == doctest::Approx(0.8));
    CHECK(simgen::soc_derate_factor(2.0) == doctest::Approx(0.6));

    core::VehicleParams p;
    p.rated_power_W = 80000.0;
    CHECK(simgen::max_discharge_W(-5.0, 10.0, p) == doctest::Approx(80000.0 * 0.7 * 0.6));
}

TEST_CASE("demand above the cap is clipped") {
    const auto p = reference_params();
    const auto env = reference_env();
    // Hard acceleration at speed: demand far above the cold, near-empty cap.
    const double uncapped =
        simgen::ground_truth_power(20.0, 3.0, 0.05, 0.0, 0.0, 25.0, 80.0, p, env, nullptr);
    const simgen::DeratingSpec spec{};
    const double cap = simgen::max_discharge_W(-5.0, 12.0, p, spec);
    const double capped =
        simgen::ground_truth_power(20.0, 3.0, 0.05, 0.0, 0.0, -5.0, 12.0, p, env, &spec);
    CHECK(uncapped > cap);
    CHECK(capped == cap);
}

TEST_CASE("sample_cycle interpolates breakpoints at 10 Hz") {
    const auto cyc = simgen::trapezoid_cycle();
    const auto s = simgen::sample_cycle(cyc, 10.0);
    CHECK(s.size() == 2200);
    CHECK(s.values()[0] == 0.0);
    // t=20 s sits halfway up the 10→30 s ramp to 15 m/s.
    CHECK(s.values()[200] == doctest::Approx(7.5).epsilon(1e-12));
    CHECK(s.values().minCoeff() >= 0.0);
}

TEST_CASE("bundled cycles are valid tables with multiples of 10 s") {
    for (const auto& c : simgen::bundled_cycles()) {
        const auto s = simgen::sample_cycle(c, 10.0);
        CHECK(s.size() % 100 == 0);
        CHECK(s.values().minCoeff() >= 0.0);
    }
    const auto udds = simgen::sample_cycle(simgen::udds_like_cycle(), 10.0);
    CHECK(udds.values().maxCoeff() == doctest::Approx(25.347).epsilon(0.01));
}

TEST_CASE("profiles stay within their documented envelopes") {
    const Eigen::Index n = 3000;
    CHECK(simgen::grade_flat(n).grade.isZero(0.0));
    CHECK(simgen::grade_rolling(n).grade.cwiseAbs().maxCoeff() <= 0.05 + 1e-12);
    CHECK(simgen::grade_hill_climb(n).grade.cwiseAbs().maxCoeff() <= 0.19);
    CHECK(simgen::grade_hill_climb(n).grade.mean() > 0.0);
    CHECK(simgen::grade_descent(n).grade.mean() < 0.0);

    const auto calm = simgen::wind_calm(n);
    CHECK(calm.wind_mps.minCoeff() >= 0.0);
    CHECK(calm.wind_mps.maxCoeff() < 0.5);
    const auto strong = simgen::wind_strong_breeze(n);
    CHECK(strong.wind_mps.minCoeff() >= 10.8);
    CHECK(strong.wind_mps.maxCoeff() < 13.9);

    const auto climate = simgen::aux_climate(n);
    CHECK(climate.aux_W.minCoeff() >= 940.0);
    CHECK(climate.aux_W.maxCoeff() <= 1135.0);
    CHECK(climate.aux_W.mean() > 950.0);
    CHECK(climate.aux_W.mean() < 1010.0);
}

TEST_CASE("wind_for_class stays inside every drivable class") {
    for (int k = 0; k < simgen::kDrivableBeaufortClasses; ++k) {
        const auto w = simgen::wind_for_class(k, 500);
        const auto& c = simgen::beaufort_classes()[static_cast<std::size_t>(k)];
        for (Eigen::Index i = 0; i < w.wind_mps.size(); ++i) {
            CHECK(simgen::classify_wind(w.wind_mps[i]).index == c.index);
        }
    }
}

TEST_CASE("a 200 s single-cell grid yields 20 windows") {
    const auto grid = tiny_grid(200.0);
    simgen::GenerationSummary sum;
    const auto ds = simgen::generate(grid, reference_params(), &sum);
    CHECK(sum.cells == 1);
    CHECK(ds.windows.size() == 20);
    CHECK(ds.trip_ids.size() == 20);
    for (const auto& w : ds.windows) {
        CHECK(static_cast<bool>(core::validate_window(w)));
        REQUIRE(w.act_pow.has_value());
    }
}

TEST_CASE("generation is bit-deterministic for a fixed seed") {
    const auto grid = tiny_grid(200.0);
    const auto a = simgen::generate(grid, reference_params());
    const auto b = simgen::generate(grid, reference_params());
    REQUIRE(a.windows.size() == b.windows.size());
    for (std::size_t i = 0; i < a.windows.size(); ++i) {
        CHECK(a.windows[i].veh_sp == b.windows[i].veh_sp);
        CHECK(a.windows[i].wind_sp == b.windows[i].wind_sp);
        CHECK(a.windows[i].aux_ld == b.windows[i].aux_ld);
        CHECK(*a.windows[i].act_pow == *b.windows[i].act_pow);
        CHECK(a.windows[i].batt_soc == b.windows[i].batt_soc);
    }
    auto grid2 = grid;
    grid2.rng_seed = 43;
    const auto c = simgen::generate(grid2, reference_params());
    CHECK(a.windows[0].wind_sp != c.windows[0].wind_sp);
}

TEST_CASE("energy bookkeeping: soc drop times capacity equals integrated power") {
    auto grid = tiny_grid(200.0);
    grid.noise_scale = 1.0;
    const auto params = reference_params();
    simgen::GenerationSummary sum;
    const auto ds = simgen::generate(grid, params, &sum);
    REQUIRE(!ds.windows.empty());
    // One cell, one trip: walk the windows in order.
    double energy_J = 0.0;
    for (const auto& w : ds.windows) {
        energy_J += w.act_pow->sum();  // per-second means over 10 s = joules
    }
    const double soc_first = ds.windows.front().batt_soc;
    // Final SOC after the last window's consumption:
    const double soc_drop_energy =
        (soc_first -
         (ds.windows.back().batt_soc - ds.windows.back().act_pow->sum() /
                                           params.battery_capacity_J * 100.0)) /
        100.0 * params.battery_capacity_J;
    double abs_energy = 0.0;
    for (const auto& w : ds.windows) {
        abs_energy += w.act_pow->cwiseAbs().sum();
    }
    CHECK(std::abs(soc_drop_energy - energy_J) <= 1e-6 * abs_energy);
}

TEST_CASE("doubling the aux profile strictly increases total energy") {
    auto grid = tiny_grid(200.0);
    grid.noise_scale = 0.0;
    const auto base = simgen::generate(grid, reference_params());
    auto grid2 = grid;
    grid2.aux_profiles[0].aux_W *= 2.0;
    const auto more = simgen::generate(grid2, reference_params());
    double e1 = 0.0, e2 = 0.0;
    for (const auto& w : base.windows) e1 += w.act_pow->sum();
    for (const auto& w : more.windows) e2 += w.act_pow->sum();
    CHECK(e2 > e1);
}

TEST_CASE("raising mean grade does not decrease total energy") {
    auto grid = tiny_grid(200.0);
    grid.noise_scale = 0.0;
    const auto flat = simgen::generate(grid, reference_params());
    auto grid2 = grid;
    grid2.grade_profiles[0].grade = Eigen::VectorXd::Constant(100, 0.03);
    const auto uphill = simgen::generate(grid2, reference_params());
    double e1 = 0.0, e2 = 0.0;
    for (const auto& w : flat.windows) e1 += w.act_pow->sum();
    for (const auto& w : uphill.windows) e2 += w.act_pow->sum();
    CHECK(e2 >= e1);
}

TEST_CASE("cold near-empty cells lose their demand peak to the cap") {
    simgen::GenerationGrid grid = tiny_grid(200.0);
    grid.noise_scale = 0.0;
    grid.temps_C = {-5.0};
    grid.initial_socs = {12.0};
    core::VehicleParams params = reference_params();
    params.rated_power_W = 20000.0;  // low rating so the ramp hits the cap
    simgen::GenerationSummary sum;
    const auto ds = simgen::generate(grid, params, &sum);
    REQUIRE(!ds.windows.empty());
    const double cap = simgen::max_discharge_W(-5.0, 12.0, params);
    double peak = -1e300;
    for (const auto& w : ds.windows) peak = std::max(peak, w.act_pow->maxCoeff());
    CHECK(peak <= cap + 1e-9);

    // The same grid without derating exceeds that cap.
    grid.derating_enabled = false;
    const auto free_ds = simgen::generate(grid, params);
    double free_peak = -1e300;
    for (const auto& w : free_ds.windows) free_peak = std::max(free_peak, w.act_pow->maxCoeff());
    CHECK(free_peak > cap);
}

TEST_CASE("battery exhaustion truncates the cell with a warning") {
    auto grid = tiny_grid(200.0);
    grid.initial_socs = {0.2};
    simgen::GenerationSummary sum;
    const auto ds = simgen::generate(grid, reference_params(), &sum);
    CHECK(sum.truncated_cells == 1);
    REQUIRE(sum.warnings.size() == 1);
    CHECK(sum.warnings[0].find("exhausted") != std::string::npos);
    CHECK(ds.windows.size() < 20);
}
