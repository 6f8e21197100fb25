#include "evrk/eval/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "evrk/core/csv.hpp"

namespace evrk::eval {
namespace {

constexpr std::uint64_t kFoldStream = 0x41;
constexpr std::uint64_t kTrainerStream = 0x42;

void check_pair(const Eigen::VectorXd& a, const Eigen::VectorXd& e, const char* who) {
    if (a.size() != e.size()) {
        throw std::invalid_argument(std::string(who) + ": length mismatch");
    }
    if (a.size() == 0) throw std::invalid_argument(std::string(who) + ": empty input");
}

// Continued fraction for the regularized incomplete beta function, evaluated
// with the modified Lentz method.
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 1e-14;
    constexpr double kTiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

double reg_inc_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return std::exp(ln_front) * betacf(a, b, x) / a;
    }
    return 1.0 - std::exp(ln_front) * betacf(b, a, 1.0 - x) / b;
}

double median_of(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace

double rmse(const Eigen::VectorXd& actual, const Eigen::VectorXd& estimated) {
    check_pair(actual, estimated, "rmse");
    return std::sqrt((actual - estimated).squaredNorm() /
                     static_cast<double>(actual.size()));
}

double mae(const Eigen::VectorXd& actual, const Eigen::VectorXd& estimated) {
    check_pair(actual, estimated, "mae");
    return (actual - estimated).cwiseAbs().sum() / static_cast<double>(actual.size());
}

CorrResult corr(const Eigen::VectorXd& actual, const Eigen::VectorXd& estimated) {
    check_pair(actual, estimated, "corr");
    const Eigen::VectorXd da = actual.array() - actual.mean();
    const Eigen::VectorXd de = estimated.array() - estimated.mean();
    const double va = da.squaredNorm();
    const double ve = de.squaredNorm();
    if (va == 0.0) return {false, 0.0, "actual has zero variance"};
    if (ve == 0.0) return {false, 0.0, "estimate has zero variance"};
    return {true, da.dot(de) / std::sqrt(va * ve), {}};
}

double mae_dev(const Eigen::VectorXd& actual_energies,
               const Eigen::VectorXd& estimated_energies) {
    check_pair(actual_energies, estimated_energies, "mae_dev");
    return (actual_energies - estimated_energies).cwiseAbs().sum() /
           static_cast<double>(actual_energies.size());
}

double t_sf(double t, int df) {
    if (df < 1) throw std::invalid_argument("t_sf: df < 1");
    if (!std::isfinite(t)) return t > 0 ? 0.0 : 1.0;
    if (t < 0.0) return 1.0 - t_sf(-t, df);
    const double x = df / (df + t * t);
    return 0.5 * reg_inc_beta(df / 2.0, 0.5, x);
}

double t_critical_one_tail(int df, double alpha) {
    if (df < 1) throw std::invalid_argument("t_critical_one_tail: df < 1");
    if (alpha <= 0.0 || alpha >= 0.5) {
        throw std::invalid_argument("t_critical_one_tail: alpha outside (0, 0.5)");
    }
    double lo = 0.0, hi = 1e3;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (t_sf(mid, df) > alpha ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

TTestResult t_test(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double alpha) {
    const auto na = a.size(), nb = b.size();
    if (na < 2 || nb < 2) throw std::invalid_argument("t_test: samples need >= 2 values");
    TTestResult r;
    r.df = static_cast<int>(na + nb - 2);
    const double ma = a.mean(), mb = b.mean();
    const double ssa = (a.array() - ma).square().sum();
    const double ssb = (b.array() - mb).square().sum();
    r.pooled_var = (ssa + ssb) / r.df;
    const double diff = ma - mb;
    if (r.pooled_var == 0.0) {
        if (diff == 0.0) {
            r.t_stat = 0.0;
            r.p_one_tail = 0.5;
            r.note = "identical samples: t = 0, fail to reject";
            return r;
        }
        r.defined = false;
        r.note = "zero pooled variance with unequal means: t undefined";
        return r;
    }
    const double se =
        std::sqrt(r.pooled_var * (1.0 / static_cast<double>(na) +
                                  1.0 / static_cast<double>(nb)));
    r.t_stat = diff / se;
    r.p_one_tail = t_sf(r.t_stat, r.df);
    r.reject = r.p_one_tail < alpha;
    return r;
}

std::vector<std::vector<int>> fold_partition(int n, int k, core::Engine& rng) {
    if (k < 1 || n < k) throw std::invalid_argument("fold_partition: need n >= k >= 1");
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    core::shuffle_in_place(order, rng);
    std::vector<std::vector<int>> folds(static_cast<std::size_t>(k));
    std::size_t at = 0;
    for (int f = 0; f < k; ++f) {
        const int size = n / k + (f < n % k ? 1 : 0);
        auto& fold = folds[static_cast<std::size_t>(f)];
        fold.assign(order.begin() + static_cast<std::ptrdiff_t>(at),
                    order.begin() + static_cast<std::ptrdiff_t>(at + std::size_t(size)));
        at += static_cast<std::size_t>(size);
    }
    return folds;
}

std::vector<FoldReport> repeated_kfold(const std::vector<core::PartitionedWindow>& windows,
                                       int k, int runs, const Trainer& trainer,
                                       std::uint64_t seed) {
    if (k < 4) throw std::invalid_argument("repeated_kfold: k < 4 leaves no training folds");
    if (runs < 1) throw std::invalid_argument("repeated_kfold: runs < 1");
    const int n = static_cast<int>(windows.size());
    if (n < k) throw std::invalid_argument("repeated_kfold: fewer windows than folds");
    for (const auto& w : windows) {
        if (!w.act_pow) throw std::invalid_argument("repeated_kfold: unlabeled window");
    }

    std::vector<FoldReport> reports;
    reports.reserve(static_cast<std::size_t>(runs * k));
    for (int run = 0; run < runs; ++run) {
        auto rng = core::derived_engine(seed, kFoldStream, static_cast<std::uint64_t>(run));
        const auto folds = fold_partition(n, k, rng);
        for (int j = 0; j < k; ++j) {
            std::vector<char> in_valid(static_cast<std::size_t>(n), 0);
            for (int step = 0; step < 3; ++step) {
                for (int idx : folds[static_cast<std::size_t>((j + step) % k)]) {
                    in_valid[static_cast<std::size_t>(idx)] = 1;
                }
            }
            std::vector<core::PartitionedWindow> train_set, valid_set;
            for (int i = 0; i < n; ++i) {
                (in_valid[static_cast<std::size_t>(i)] ? valid_set : train_set)
                    .push_back(windows[static_cast<std::size_t>(i)]);
            }
            auto sub_rng = core::derived_engine(
                seed, kTrainerStream,
                static_cast<std::uint64_t>(run) * static_cast<std::uint64_t>(k) +
                    static_cast<std::uint64_t>(j));
            const PerSecondPredictor predictor = trainer(train_set, sub_rng());

            const auto seconds =
                static_cast<Eigen::Index>(valid_set.size()) * core::kWindowSeconds;
            Eigen::VectorXd actual(seconds), estimated(seconds);
            Eigen::Index at = 0;
            for (const auto& w : valid_set) {
                const Eigen::VectorXd est = predictor(w);
                if (est.size() != core::kWindowSeconds) {
                    throw std::invalid_argument(
                        "repeated_kfold: predictor returned wrong length");
                }
                actual.segment(at, core::kWindowSeconds) = *w.act_pow;
                estimated.segment(at, core::kWindowSeconds) = est;
                at += core::kWindowSeconds;
            }
            FoldReport report;
            report.run = run;
            report.fold = j;
            report.rmse_W = rmse(actual, estimated);
            report.mae_W = mae(actual, estimated);
            report.corr = corr(actual, estimated);
            reports.push_back(std::move(report));
        }
    }
    return reports;
}

void write_cv_csv(const std::string& path, const std::vector<FoldReport>& reports) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_cv_csv: cannot open " + path);
    out << "run,fold,metric,value\n";
    for (const auto& r : reports) {
        out << r.run << ',' << r.fold << ",rmse_w," << core::format_double(r.rmse_W)
            << '\n';
        out << r.run << ',' << r.fold << ",mae_w," << core::format_double(r.mae_W) << '\n';
        out << r.run << ',' << r.fold << ",corr,";
        if (r.corr.defined) {
            out << core::format_double(r.corr.value);
        } else {
            out << "NA";
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write_cv_csv: write failed for " + path);
}

std::vector<ComparisonRow> comparison_table(const std::vector<TechniqueEval>& techniques,
                                            const std::vector<Trip>& trips,
                                            int timing_reps) {
    if (techniques.empty()) throw std::invalid_argument("comparison_table: no techniques");
    if (trips.empty()) throw std::invalid_argument("comparison_table: no trips");
    if (timing_reps < 1) throw std::invalid_argument("comparison_table: timing_reps < 1");
    for (const auto& trip : trips) {
        if (trip.windows.empty()) {
            throw std::invalid_argument("comparison_table: empty trip");
        }
        for (const auto& w : trip.windows) {
            if (!w.act_pow) throw std::invalid_argument("comparison_table: unlabeled window");
        }
    }

    Eigen::Index total_seconds = 0;
    for (const auto& trip : trips) {
        total_seconds += static_cast<Eigen::Index>(trip.windows.size()) *
                         core::kWindowSeconds;
    }
    Eigen::VectorXd actual_seconds(total_seconds);
    Eigen::VectorXd actual_energy_MJ(static_cast<Eigen::Index>(trips.size()));
    {
        Eigen::Index at = 0;
        for (std::size_t t = 0; t < trips.size(); ++t) {
            double energy = 0.0;
            for (const auto& w : trips[t].windows) {
                actual_seconds.segment(at, core::kWindowSeconds) = *w.act_pow;
                energy += w.act_pow->sum();  // 1 s per sample
                at += core::kWindowSeconds;
            }
            actual_energy_MJ[static_cast<Eigen::Index>(t)] = energy / 1e6;
        }
    }

    std::vector<ComparisonRow> rows;
    rows.reserve(techniques.size());
    for (const auto& tech : techniques) {
        ComparisonRow row;
        row.technique = tech.name;
        row.per_second = tech.per_second;

        Eigen::VectorXd est_energy_MJ(static_cast<Eigen::Index>(trips.size()));
        if (tech.per_second) {
            if (!tech.estimate_seconds) {
                throw std::invalid_argument("comparison_table: " + tech.name +
                                            " lacks a per-second estimator");
            }
            Eigen::VectorXd est_seconds(total_seconds);
            Eigen::Index at = 0;
            for (std::size_t t = 0; t < trips.size(); ++t) {
                const Eigen::VectorXd est = tech.estimate_seconds(trips[t]);
                const auto want = static_cast<Eigen::Index>(trips[t].windows.size()) *
                                  core::kWindowSeconds;
                if (est.size() != want) {
                    throw std::invalid_argument("comparison_table: " + tech.name +
                                                " returned wrong trip length");
                }
                est_seconds.segment(at, want) = est;
                at += want;
                est_energy_MJ[static_cast<Eigen::Index>(t)] =
                    tech.estimate_trip_energy ? tech.estimate_trip_energy(trips[t]) / 1e6
                                              : est.sum() / 1e6;
            }
            row.rmse_W = rmse(actual_seconds, est_seconds);
            row.mae_W = mae(actual_seconds, est_seconds);
            row.corr = corr(actual_seconds, est_seconds);
        } else {
            if (!tech.estimate_trip_energy) {
                throw std::invalid_argument("comparison_table: " + tech.name +
                                            " lacks a trip-energy estimator");
            }
            for (std::size_t t = 0; t < trips.size(); ++t) {
                est_energy_MJ[static_cast<Eigen::Index>(t)] =
                    tech.estimate_trip_energy(trips[t]) / 1e6;
            }
            row.corr = {false, 0.0, "per-second metrics not applicable"};
        }
        row.mae_dev_MJ = mae_dev(actual_energy_MJ, est_energy_MJ);

        // Median-of-reps timing per trip (warm call first), then the mean
        // over trips: mean prediction time per drive cycle.
        double latency_sum = 0.0;
        for (const auto& trip : trips) {
            const auto timed = [&]() {
                const auto start = std::chrono::steady_clock::now();
                if (tech.per_second) {
                    (void)tech.estimate_seconds(trip);
                } else {
                    (void)tech.estimate_trip_energy(trip);
                }
                const auto stop = std::chrono::steady_clock::now();
                return std::chrono::duration<double>(stop - start).count();
            };
            (void)timed();  // warm-up, untimed discard
            std::vector<double> reps;
            reps.reserve(static_cast<std::size_t>(timing_reps));
            for (int i = 0; i < timing_reps; ++i) reps.push_back(timed());
            latency_sum += median_of(std::move(reps));
        }
        row.mptdc_s = latency_sum / static_cast<double>(trips.size());
        rows.push_back(std::move(row));
    }

    // Best-per-column flags: minimum among applicable rows; maximum for corr.
    const auto flag_min = [&](auto getter, auto setter, bool per_second_only) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& row : rows) {
            if (per_second_only && !row.per_second) continue;
            best = std::min(best, getter(row));
        }
        for (auto& row : rows) {
            if (per_second_only && !row.per_second) continue;
            if (getter(row) == best) setter(row);
        }
    };
    flag_min([](const ComparisonRow& r) { return r.rmse_W; },
             [](ComparisonRow& r) { r.best_rmse = true; }, true);
    flag_min([](const ComparisonRow& r) { return r.mae_W; },
             [](ComparisonRow& r) { r.best_mae = true; }, true);
    flag_min([](const ComparisonRow& r) { return r.mae_dev_MJ; },
             [](ComparisonRow& r) { r.best_mae_dev = true; }, false);
    flag_min([](const ComparisonRow& r) { return r.mptdc_s; },
             [](ComparisonRow& r) { r.best_mptdc = true; }, false);
    double best_corr = -std::numeric_limits<double>::infinity();
    for (const auto& row : rows) {
        if (row.corr.defined) best_corr = std::max(best_corr, row.corr.value);
    }
    for (auto& row : rows) {
        if (row.corr.defined && row.corr.value == best_corr) row.best_corr = true;
    }
    return rows;
}

void write_comparison_csv(const std::string& path, const std::vector<ComparisonRow>& rows) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_comparison_csv: cannot open " + path);
    out << "technique,rmse_w,mae_w,corr,mae_dev_mj,mptdc_s,"
           "best_rmse,best_mae,best_corr,best_mae_dev,best_mptdc\n";
    for (const auto& r : rows) {
        out << r.technique << ',';
        if (r.per_second) {
            out << core::format_double(r.rmse_W) << ',' << core::format_double(r.mae_W)
                << ',';
        } else {
            out << "NA,NA,";
        }
        if (r.corr.defined) {
            out << core::format_double(r.corr.value);
        } else {
            out << "NA";
        }
        out << ',' << core::format_double(r.mae_dev_MJ) << ','
            << core::format_double(r.mptdc_s) << ',' << (r.best_rmse ? 1 : 0) << ','
            << (r.best_mae ? 1 : 0) << ',' << (r.best_corr ? 1 : 0) << ','
            << (r.best_mae_dev ? 1 : 0) << ',' << (r.best_mptdc ? 1 : 0) << '\n';
    }
    if (!out) throw std::runtime_error("write_comparison_csv: write failed for " + path);
}

std::string format_comparison(const std::vector<ComparisonRow>& rows) {
    std::ostringstream out;
    out << std::left << std::setw(14) << "technique" << std::right << std::setw(14)
        << "rmse [W]" << std::setw(14) << "mae [W]" << std::setw(12) << "corr"
        << std::setw(16) << "mae_dev [MJ]" << std::setw(14) << "mptdc [s]" << '\n';
    const auto cell = [](double v, bool best, bool applicable) {
        if (!applicable) return std::string("NA");
        std::ostringstream s;
        s << std::fixed << std::setprecision(4) << v << (best ? "*" : " ");
        return s.str();
    };
    for (const auto& r : rows) {
        out << std::left << std::setw(14) << r.technique << std::right << std::setw(14)
            << cell(r.rmse_W, r.best_rmse, r.per_second) << std::setw(14)
            << cell(r.mae_W, r.best_mae, r.per_second) << std::setw(12)
            << cell(r.corr.value, r.best_corr, r.corr.defined) << std::setw(16)
            << cell(r.mae_dev_MJ, r.best_mae_dev, true) << std::setw(14)
            << cell(r.mptdc_s, r.best_mptdc, true) << '\n';
    }
    return out.str();
}

}  // namespace evrk::eval
