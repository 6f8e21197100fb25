#pragma once

// Metrics, repeated k-fold cross-validation, the two-sample t-test, and the
// multi-technique comparison table.

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "evrk/core/rng.hpp"
#include "evrk/core/types.hpp"

namespace evrk::eval {

// ---------------------------------------------------------------- metrics

// √(Σ(a−e)²/n).  Throws std::invalid_argument on length mismatch or empty.
[[nodiscard]] double rmse(const Eigen::VectorXd& actual, const Eigen::VectorXd& estimated);

// Σ|a−e|/n.  Same error contract as rmse.
[[nodiscard]] double mae(const Eigen::VectorXd& actual, const Eigen::VectorXd& estimated);

struct CorrResult {
    bool defined = false;
    double value = 0.0;
    std::string reason;  // set when !defined, e.g. "actual has zero variance"
};

// Pearson correlation; zero-variance inputs yield an explicit not-a-value.
[[nodiscard]] CorrResult corr(const Eigen::VectorXd& actual,
                              const Eigen::VectorXd& estimated);

// Mean absolute difference of paired per-cycle trip energies (callers pass
// megajoules by convention).  Throws on mismatch or empty.
[[nodiscard]] double mae_dev(const Eigen::VectorXd& actual_energies,
                             const Eigen::VectorXd& estimated_energies);

// ------------------------------------------------------------- student's t

// Survival function P(T > t) of Student's t with df degrees of freedom,
// computed through the regularized incomplete beta function (continued
// fraction, modified Lentz evaluation).
[[nodiscard]] double t_sf(double t, int df);

// One-tail critical value: the t with t_sf(t, df) = alpha, by bisection.
[[nodiscard]] double t_critical_one_tail(int df, double alpha);

struct TTestResult {
    bool defined = true;
    double t_stat = 0.0;
    double pooled_var = 0.0;
    int df = 0;
    double p_one_tail = 0.5;
    bool reject = false;  // p_one_tail < alpha
    std::string note;
};

// Equal-variance two-sample t-test of H1: mean(a) > mean(b); one-tailed
// p-value from t_sf.  df = n_a + n_b − 2.  Identical samples give t = 0 and
// fail to reject; zero pooled variance with unequal means is reported as
// undefined.  Throws std::invalid_argument when either sample has < 2 values.
[[nodiscard]] TTestResult t_test(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                 double alpha = 0.05);

// -------------------------------------------------------- cross-validation

// A trained technique: per-second power estimates for one window.
using PerSecondPredictor = std::function<Eigen::VectorXd(const core::PartitionedWindow&)>;
// Fits a technique on labeled windows; the seed feeds any internal streams.
using Trainer = std::function<PerSecondPredictor(
    const std::vector<core::PartitionedWindow>&, std::uint64_t seed)>;

struct FoldReport {
    int run = 0;
    int fold = 0;
    double rmse_W = 0.0;
    double mae_W = 0.0;
    CorrResult corr;
};

// Seeded permutation split into k folds; sizes differ by at most one with the
// remainder going to the earliest folds.  Returned index lists are disjoint
// and cover [0, n) exactly.
[[nodiscard]] std::vector<std::vector<int>> fold_partition(int n, int k, core::Engine& rng);

// Repeated k-fold: per run the windows are re-partitioned with a run-derived
// stream; fold j validates on folds {j, j+1, j+2} (mod k) — a 70/30 split at
// k = 10 — and trains on the remaining k−3, so every fold validates at least
// once per run.  Returns runs×k reports ordered by (run, fold).
// Throws std::invalid_argument when the dataset has fewer than k windows,
// k < 4, runs < 1, or a window lacks targets.
[[nodiscard]] std::vector<FoldReport> repeated_kfold(
    const std::vector<core::PartitionedWindow>& windows, int k, int runs,
    const Trainer& trainer, std::uint64_t seed);

// CV distribution CSV: header `run,fold,metric,value`; one row per report per
// metric (rmse_w, mae_w, corr), corr emitting NA when undefined.
void write_cv_csv(const std::string& path, const std::vector<FoldReport>& reports);

// --------------------------------------------------------- comparison table

// One drive cycle at evaluation time: ordered labeled windows.
struct Trip {
    std::vector<core::PartitionedWindow> windows;
    double initial_soc_pct = 90.0;
};

struct TechniqueEval {
    std::string name;
    bool per_second = true;  // trip-level techniques carry NA per-second metrics
    // Per-second power for a whole trip (10 × window count values); required
    // when per_second.
    std::function<Eigen::VectorXd(const Trip&)> estimate_seconds;
    // Whole-trip energy in joules; defaults to Σ per-second power × 1 s.
    std::function<double(const Trip&)> estimate_trip_energy;
};

struct ComparisonRow {
    std::string technique;
    bool per_second = true;
    double rmse_W = 0.0;
    double mae_W = 0.0;
    CorrResult corr;
    double mae_dev_MJ = 0.0;
    double mptdc_s = 0.0;  // mean over trips of the median timed prediction
    bool best_rmse = false;
    bool best_mae = false;
    bool best_corr = false;
    bool best_mae_dev = false;
    bool best_mptdc = false;
};

// Evaluates every technique on the same trips: per-second metrics pool all
// seconds of all trips; trip energies feed mae_dev (reported in MJ); timing
// is the median of `timing_reps` warm predictions per trip (monotonic clock,
// training excluded), averaged over trips.  Best-per-column flags mark the
// minimum (maximum for corr) among applicable rows.
// Throws std::invalid_argument on empty inputs or unlabeled windows.
[[nodiscard]] std::vector<ComparisonRow> comparison_table(
    const std::vector<TechniqueEval>& techniques, const std::vector<Trip>& trips,
    int timing_reps = 5);

// Comparison CSV: header
// `technique,rmse_w,mae_w,corr,mae_dev_mj,mptdc_s,best_rmse,best_mae,best_corr,best_mae_dev,best_mptdc`
// with NA cells for metrics a technique does not define.
void write_comparison_csv(const std::string& path, const std::vector<ComparisonRow>& rows);

// Human-readable aligned table with units in the header and `*` on the best
// cell per column.
[[nodiscard]] std::string format_comparison(const std::vector<ComparisonRow>& rows);

}  // namespace evrk::eval
