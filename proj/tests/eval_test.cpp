#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "evrk/core/rng.hpp"
#include "evrk/eval/eval.hpp"

using namespace evrk;
using Eigen::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> xs) {
    VectorXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

core::PartitionedWindow labeled_window(double power) {
    core::PartitionedWindow w;
    w.veh_sp = VectorXd::Constant(100, 8.0);
    w.road_el = VectorXd::Constant(100, 90.0);
    w.veh_acc = VectorXd::Zero(100);
    w.aux_ld = VectorXd::Constant(100, 200.0);
    w.wind_sp = VectorXd::Zero(100);
    w.env_temp = 21.0;
    w.batt_soc = 70.0;
    w.act_pow = VectorXd::Constant(10, power);
    return w;
}

}  // namespace

TEST_CASE("rmse and mae: hand values and error contract") {
    const VectorXd a = vec({1, 2, 3});
    const VectorXd e = vec({2, 3, 4});
    CHECK(eval::rmse(a, e) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(eval::mae(a, e) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(eval::rmse(vec({5}), vec({2})) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(eval::mae(vec({5}), vec({2})) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(eval::rmse(vec({1, 5}), vec({1, 5})) == 0.0);
    CHECK_THROWS_AS((void)eval::rmse(a, vec({1})), std::invalid_argument);
    CHECK_THROWS_AS((void)eval::mae(VectorXd{}, VectorXd{}), std::invalid_argument);
}

TEST_CASE("metrics agree with a long-double reference on random data") {
    core::Engine rng(9001);
    std::uniform_real_distribution<double> u(-5e4, 5e4);
    const Eigen::Index n = 10000;
    VectorXd a(n), e(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        a[i] = u(rng);
        e[i] = u(rng);
    }
    long double sq = 0.0L, ab = 0.0L;
    for (Eigen::Index i = 0; i < n; ++i) {
        const long double d = static_cast<long double>(a[i]) - e[i];
        sq += d * d;
        ab += d < 0 ? -d : d;
    }
    const double ref_rmse = static_cast<double>(std::sqrt(sq / n));
    const double ref_mae = static_cast<double>(ab / n);
    CHECK(eval::rmse(a, e) == doctest::Approx(ref_rmse).epsilon(1e-12));
    CHECK(eval::mae(a, e) == doctest::Approx(ref_mae).epsilon(1e-12));

    long double sa = 0.0L, se = 0.0L;
    for (Eigen::Index i = 0; i < n; ++i) {
        sa += a[i];
        se += e[i];
    }
    const long double ma = sa / n, me = se / n;
    long double cov = 0.0L, va = 0.0L, ve = 0.0L;
    for (Eigen::Index i = 0; i < n; ++i) {
        const long double da = a[i] - ma, de = e[i] - me;
        cov += da * de;
        va += da * da;
        ve += de * de;
    }
    const double ref_corr = static_cast<double>(cov / std::sqrt(va * ve));
    const auto c = eval::corr(a, e);
    REQUIRE(c.defined);
    CHECK(c.value == doctest::Approx(ref_corr).epsilon(1e-10));
}

TEST_CASE("correlation: exact lines, affine invariance, degenerate inputs") {
    const VectorXd a = vec({1, 2, 3, 4, 5});
    const auto self = eval::corr(a, a);
    REQUIRE(self.defined);
    CHECK(self.value == doctest::Approx(1.0).epsilon(1e-15));

    const auto anti = eval::corr(a, (-a).eval());
    REQUIRE(anti.defined);
    CHECK(anti.value == doctest::Approx(-1.0).epsilon(1e-15));

    const auto affine = eval::corr(a, (2.0 * a.array() + 5.0).matrix().eval());
    REQUIRE(affine.defined);
    CHECK(affine.value == doctest::Approx(1.0).epsilon(1e-12));

    const auto flat = eval::corr(VectorXd::Constant(4, 3.0), a.head(4).eval());
    CHECK(!flat.defined);
    CHECK(flat.reason == "actual has zero variance");
    const auto flat_e = eval::corr(a.head(4).eval(), VectorXd::Constant(4, 3.0));
    CHECK(!flat_e.defined);
    CHECK(flat_e.reason == "estimate has zero variance");
}

TEST_CASE("trip-energy deviation: hand value and joint-permutation invariance") {
    const VectorXd act = vec({10.0, 20.0, 30.0});
    const VectorXd est = vec({12.0, 17.0, 30.0});
    CHECK(eval::mae_dev(act, est) == doctest::Approx(5.0 / 3.0).epsilon(1e-15));

    const VectorXd act_p = vec({30.0, 10.0, 20.0});
    const VectorXd est_p = vec({30.0, 12.0, 17.0});
    CHECK(eval::mae_dev(act_p, est_p) == eval::mae_dev(act, est));
    CHECK_THROWS_AS((void)eval::mae_dev(act, vec({1.0})), std::invalid_argument);
}

TEST_CASE("t survival function matches tabulated critical values") {
    // (df, alpha) -> one-tail critical value
    const struct {
        int df;
        double alpha;
        double crit;
    } table[] = {
        {1, 0.05, 6.3138},  {1, 0.01, 31.821},  {10, 0.05, 1.8125}, {10, 0.01, 2.7638},
        {18, 0.05, 1.7341}, {18, 0.01, 2.5524}, {30, 0.05, 1.6973}, {30, 0.01, 2.4573},
    };
    for (const auto& row : table) {
        CHECK(eval::t_critical_one_tail(row.df, row.alpha) ==
              doctest::Approx(row.crit).epsilon(5e-4));
        CHECK(eval::t_sf(row.crit, row.df) == doctest::Approx(row.alpha).epsilon(5e-3));
    }

    CHECK(eval::t_sf(0.0, 7) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(eval::t_sf(-2.0, 12) ==
          doctest::Approx(1.0 - eval::t_sf(2.0, 12)).epsilon(1e-12));
    CHECK(eval::t_sf(3.0, 9) < eval::t_sf(2.0, 9));
    CHECK_THROWS_AS((void)eval::t_sf(1.0, 0), std::invalid_argument);
    CHECK_THROWS_AS((void)eval::t_critical_one_tail(5, 0.7), std::invalid_argument);
}

TEST_CASE("two-sample t-test: hand example, identical samples, degenerate case") {
    const VectorXd a = vec({3, 4, 5, 6, 7});
    const VectorXd b = vec({1, 2, 3, 4, 5});
    const auto r = eval::t_test(a, b);
    REQUIRE(r.defined);
    CHECK(r.df == 8);
    CHECK(r.pooled_var == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(r.t_stat == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.p_one_tail == doctest::Approx(0.0403).epsilon(5e-3));
    CHECK(r.reject);  // alpha 0.05
    CHECK(!eval::t_test(a, b, 0.01).reject);

    // ten-versus-ten comparison runs at 18 degrees of freedom
    VectorXd ten_a(10), ten_b(10);
    for (int i = 0; i < 10; ++i) {
        ten_a[i] = i + 1.0;
        ten_b[i] = 2.0 * i;
    }
    CHECK(eval::t_test(ten_a, ten_b).df == 18);

    const auto same = eval::t_test(a, a);
    REQUIRE(same.defined);
    CHECK(same.t_stat == 0.0);
    CHECK(same.p_one_tail == 0.5);
    CHECK(!same.reject);

    const auto degen = eval::t_test(VectorXd::Constant(3, 2.0), VectorXd::Constant(3, 1.0));
    CHECK(!degen.defined);

    CHECK_THROWS_AS((void)eval::t_test(vec({1.0}), a), std::invalid_argument);
}

TEST_CASE("fold partition covers, stays disjoint, and sizes the remainder early") {
    core::Engine rng(33);
    const auto folds = eval::fold_partition(103, 10, rng);
    REQUIRE(folds.size() == 10);
    std::set<int> seen;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        CHECK(folds[f].size() == (f < 3 ? 11u : 10u));
        for (int idx : folds[f]) {
            CHECK(seen.insert(idx).second);  // disjoint
            CHECK(idx >= 0);
            CHECK(idx < 103);
        }
    }
    CHECK(seen.size() == 103u);

    core::Engine rng_a(33), rng_b(33);
    CHECK(eval::fold_partition(50, 5, rng_a) == eval::fold_partition(50, 5, rng_b));
    core::Engine rng_c(34);
    CHECK(eval::fold_partition(50, 5, rng_c) != eval::fold_partition(50, 5, rng_b));

    core::Engine rng_d(1);
    CHECK_THROWS_AS((void)eval::fold_partition(3, 10, rng_d), std::invalid_argument);
}

TEST_CASE("repeated k-fold: report grid, fold rotation, seeds, determinism") {
    std::vector<core::PartitionedWindow> windows;
    for (int i = 0; i < 40; ++i) windows.push_back(labeled_window(100.0 * (i + 1)));

    std::vector<std::size_t> train_sizes;
    std::set<std::uint64_t> seeds_seen;
    const eval::Trainer trainer = [&](const std::vector<core::PartitionedWindow>& train,
                                      std::uint64_t seed) -> eval::PerSecondPredictor {
        train_sizes.push_back(train.size());
        seeds_seen.insert(seed);
        return [](const core::PartitionedWindow& w) { return *w.act_pow; };
    };

    const auto reports = eval::repeated_kfold(windows, 10, 5, trainer, 77);
    REQUIRE(reports.size() == 50);
    for (int run = 0; run < 5; ++run) {
        for (int fold = 0; fold < 10; ++fold) {
            const auto& r = reports[static_cast<std::size_t>(run * 10 + fold)];
            CHECK(r.run == run);
            CHECK(r.fold == fold);
            CHECK(r.rmse_W == 0.0);  // oracle predictor
            CHECK(r.mae_W == 0.0);
            REQUIRE(r.corr.defined);  // validation windows differ in power
            CHECK(r.corr.value == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    // 40 windows, k = 10: 3 folds of 4 validate, 28 train — every call
    for (std::size_t s : train_sizes) CHECK(s == 28u);
    CHECK(seeds_seen.size() == 50u);  // every (run, fold) trains with its own seed

    const auto again = eval::repeated_kfold(windows, 10, 5, trainer, 77);
    REQUIRE(again.size() == reports.size());
    for (std::size_t i = 0; i < reports.size(); ++i) {
        CHECK(again[i].rmse_W == reports[i].rmse_W);
        CHECK(again[i].corr.value == reports[i].corr.value);
    }

    CHECK_THROWS_AS(
        (void)eval::repeated_kfold(windows, 3, 1, trainer, 1), std::invalid_argument);
    CHECK_THROWS_AS(
        (void)eval::repeated_kfold(windows, 10, 0, trainer, 1), std::invalid_argument);
    std::vector<core::PartitionedWindow> unlabeled = windows;
    unlabeled[0].act_pow.reset();
    CHECK_THROWS_AS(
        (void)eval::repeated_kfold(unlabeled, 10, 1, trainer, 1), std::invalid_argument);
}

TEST_CASE("cross-validation CSV layout") {
    namespace fs = std::filesystem;
    std::vector<eval::FoldReport> reports(2);
    reports[0].run = 0;
    reports[0].fold = 1;
    reports[0].rmse_W = 2.5;
    reports[0].mae_W = 1.5;
    reports[0].corr = {true, 0.75, ""};
    reports[1].run = 1;
    reports[1].fold = 0;
    reports[1].rmse_W = 3.0;
    reports[1].mae_W = 2.0;
    reports[1].corr = {false, 0.0, "zero variance"};

    const auto dir = fs::temp_directory_path() / "evrk_eval_csv";
    fs::create_directories(dir);
    const auto path = (dir / "cv.csv").string();
    eval::write_cv_csv(path, reports);
    const std::string text = slurp(path);
    CHECK(text.rfind("run,fold,metric,value\n", 0) == 0);
    CHECK(text.find("0,1,rmse_w,2.5\n") != std::string::npos);
    CHECK(text.find("0,1,corr,0.75\n") != std::string::npos);
    CHECK(text.find("1,0,corr,NA\n") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("comparison table: pooled metrics, NA rows, best flags, CSV and text") {
    std::vector<eval::Trip> trips(2);
    for (int t = 0; t < 2; ++t) {
        for (int i = 0; i < 3; ++i) {
            trips[static_cast<std::size_t>(t)].windows.push_back(
                labeled_window(1000.0 * (t * 3 + i + 1)));
        }
    }

    eval::TechniqueEval exact;
    exact.name = "exact";
    exact.estimate_seconds = [](const eval::Trip& trip) {
        VectorXd out(static_cast<Eigen::Index>(trip.windows.size()) * 10);
        Eigen::Index at = 0;
        for (const auto& w : trip.windows) {
            out.segment(at, 10) = *w.act_pow;
            at += 10;
        }
        return out;
    };

    eval::TechniqueEval biased;
    biased.name = "biased";
    biased.estimate_seconds = [&](const eval::Trip& trip) {
        return (exact.estimate_seconds(trip).array() + 100.0).matrix().eval();
    };

    eval::TechniqueEval triplevel;
    triplevel.name = "triplevel";
    triplevel.per_second = false;
    triplevel.estimate_trip_energy = [](const eval::Trip& trip) {
        double e = 0.0;
        for (const auto& w : trip.windows) e += w.act_pow->sum();
        return e + 5.0e4;  // 0.05 MJ high on every trip
    };

    const auto rows = eval::comparison_table({exact, biased, triplevel}, trips, 3);
    REQUIRE(rows.size() == 3);

    CHECK(rows[0].rmse_W == 0.0);
    CHECK(rows[0].mae_W == 0.0);
    REQUIRE(rows[0].corr.defined);
    CHECK(rows[0].corr.value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rows[0].mae_dev_MJ == 0.0);
    CHECK(rows[0].best_rmse);
    CHECK(rows[0].best_mae);
    CHECK(rows[0].best_corr);
    CHECK(rows[0].best_mae_dev);

    CHECK(rows[1].rmse_W == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(rows[1].mae_W == doctest::Approx(100.0).epsilon(1e-12));
    REQUIRE(rows[1].corr.defined);
    CHECK(rows[1].corr.value == doctest::Approx(1.0).epsilon(1e-12));  // shift-invariant
    // each trip has 30 seconds: energy error 30·100 J = 0.003 MJ
    CHECK(rows[1].mae_dev_MJ == doctest::Approx(0.003).epsilon(1e-12));
    CHECK(!rows[1].best_rmse);
    CHECK(rows[1].best_corr);  // tied maximum is flagged on both rows
    CHECK(!rows[1].best_mae_dev);

    CHECK(!rows[2].per_second);
    CHECK(!rows[2].corr.defined);
    CHECK(rows[2].mae_dev_MJ == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(!rows[2].best_rmse);  // never competes on per-second columns
    CHECK(!rows[2].best_mae);
    CHECK(!rows[2].best_mae_dev);
    for (const auto& row : rows) CHECK(row.mptdc_s >= 0.0);

    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "evrk_cmp_csv";
    fs::create_directories(dir);
    const auto path = (dir / "cmp.csv").string();
    eval::write_comparison_csv(path, rows);
    const std::string text = slurp(path);
    CHECK(text.rfind("technique,rmse_w,mae_w,corr,mae_dev_mj,mptdc_s,best_rmse,best_mae,"
                     "best_corr,best_mae_dev,best_mptdc\n",
                     0) == 0);
    CHECK(text.find("\ntriplevel,NA,NA,NA,") != std::string::npos);
    CHECK(text.find("\nexact,0,0,1,0,") != std::string::npos);
    fs::remove_all(dir);

    const std::string pretty = eval::format_comparison(rows);
    CHECK(pretty.find("technique") != std::string::npos);
    CHECK(pretty.find("rmse [W]") != std::string::npos);
    CHECK(pretty.find("exact") != std::string::npos);
    CHECK(pretty.find("0.0000*") != std::string::npos);
    CHECK(pretty.find("NA") != std::string::npos);

    CHECK_THROWS_AS((void)eval::comparison_table({}, trips, 1), std::invalid_argument);
    CHECK_THROWS_AS((void)eval::comparison_table({exact}, {}, 1), std::invalid_argument);
}
