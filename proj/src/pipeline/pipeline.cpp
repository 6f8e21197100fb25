#include "evrk/pipeline/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "evrk/core/csv.hpp"
#include "evrk/prep/normalize.hpp"
#include "evrk/prep/prep.hpp"

namespace evrk::pipeline {
namespace {

constexpr double kSecondsPerSample = 1.0;

void check_models(const pce::CnnModel& cnn, const bdt::BdtModel* fine_tuner,
                  const EstimateOptions& opts) {
    if (!cnn.norm.has(prep::Channel::ActPow)) {
        throw std::invalid_argument(
            "estimate_trip: model normalization lacks the power channel");
    }
    if (opts.use_fine_tuner) {
        if (fine_tuner == nullptr) {
            throw std::invalid_argument("estimate_trip: fine tuner requested but missing");
        }
        if (fine_tuner->trees.empty()) {
            throw std::invalid_argument("estimate_trip: fine tuner has no trees");
        }
        if (fine_tuner->n_features > 0 && fine_tuner->n_features != 8) {
            throw std::invalid_argument(
                "estimate_trip: fine tuner arity differs from the 8 pipeline features");
        }
    }
}

// One window through the models: denormalized per-second power estimates.
Eigen::VectorXd window_power(const pce::CnnModel& cnn, const bdt::BdtModel* fine_tuner,
                             const core::PartitionedWindow& w, double soc_pct,
                             const EstimateOptions& opts) {
    core::PartitionedWindow injected = w;
    if (opts.soc_feedback) injected.batt_soc = soc_pct;

    const pce::NormalizedSample sample = pce::make_sample(injected, cnn.norm, false);
    const Eigen::VectorXd raw = pce::forward(cnn, sample);
    const auto& pow_bounds = cnn.norm.at(prep::Channel::ActPow);
    Eigen::VectorXd cnn_est(raw.size());
    for (Eigen::Index i = 0; i < raw.size(); ++i) {
        cnn_est[i] = prep::denormalize_scalar(raw[i], pow_bounds);
    }
    if (!opts.use_fine_tuner) return cnn_est;

    const Eigen::Matrix<double, 10, 7> features = prep::resample_window(injected);
    Eigen::VectorXd tuned(cnn_est.size());
    Eigen::VectorXd row(8);
    for (Eigen::Index s = 0; s < cnn_est.size(); ++s) {
        row.head<7>() = features.row(s).transpose();
        row[7] = cnn_est[s];
        tuned[s] = bdt::predict(*fine_tuner, row);
    }
    return tuned;
}

}  // namespace

void BatteryState::validate() const {
    if (!std::isfinite(soc_percent) || soc_percent < 0.0 || soc_percent > 100.0) {
        throw std::invalid_argument("battery state: soc outside [0,100]");
    }
    if (!std::isfinite(capacity_J) || capacity_J <= 0.0) {
        throw std::invalid_argument("battery state: capacity must be positive");
    }
}

BatteryState soc_update(const BatteryState& state, const Eigen::VectorXd& est_pow_W) {
    state.validate();
    const double energy_J = est_pow_W.sum() * kSecondsPerSample;
    const double raw = state.soc_percent - energy_J / state.capacity_J * 100.0;
    BatteryState next = state;
    next.soc_percent = std::clamp(raw, 0.0, 100.0);
    next.saturated = next.soc_percent != raw;
    return next;
}

TripEstimate estimate_trip(const pce::CnnModel& cnn, const bdt::BdtModel* fine_tuner,
                           const std::vector<core::PartitionedWindow>& windows,
                           double initial_soc_pct, const EstimateOptions& opts) {
    if (windows.empty()) throw std::invalid_argument("estimate_trip: no windows");
    check_models(cnn, fine_tuner, opts);

    BatteryState state;
    state.soc_percent = initial_soc_pct;
    state.capacity_J = opts.capacity_J;
    state.validate();

    const auto seconds = static_cast<Eigen::Index>(windows.size()) * core::kWindowSeconds;
    TripEstimate trip;
    trip.est_pow_W.resize(seconds);
    trip.cum_energy_J.resize(seconds);
    trip.soc_pct.resize(seconds);

    double cum_energy = 0.0;
    Eigen::Index at = 0;
    for (const auto& w : windows) {
        const Eigen::VectorXd pow = window_power(cnn, fine_tuner, w, state.soc_percent, opts);
        const BatteryState next = soc_update(state, pow);
        double running = state.soc_percent;
        for (Eigen::Index s = 0; s < pow.size(); ++s, ++at) {
            cum_energy += pow[s] * kSecondsPerSample;
            running -= pow[s] * kSecondsPerSample / state.capacity_J * 100.0;
            trip.est_pow_W[at] = pow[s];
            trip.cum_energy_J[at] = cum_energy;
            trip.soc_pct[at] = running;
        }
        trip.soc_pct[at - 1] = next.soc_percent;  // boundary carries the clamped value
        trip.soc_saturated = trip.soc_saturated || next.saturated;
        state = next;
    }
    trip.final_soc_pct = state.soc_percent;
    return trip;
}

double estimate_window_latency(const pce::CnnModel& cnn, const bdt::BdtModel* fine_tuner,
                               const core::PartitionedWindow& window, double soc_pct,
                               const EstimateOptions& opts) {
    check_models(cnn, fine_tuner, opts);
    BatteryState state;
    state.soc_percent = soc_pct;
    state.capacity_J = opts.capacity_J;
    const auto start = std::chrono::steady_clock::now();
    const Eigen::VectorXd pow = window_power(cnn, fine_tuner, window, soc_pct, opts);
    const BatteryState next = soc_update(state, pow);
    const auto stop = std::chrono::steady_clock::now();
    (void)next;
    return std::chrono::duration<double>(stop - start).count();
}

void write_trip_csv(const std::string& path, const TripEstimate& trip) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_trip_csv: cannot open " + path);
    out << "second,est_pow_w,cum_energy_j,soc_pct\n";
    for (Eigen::Index s = 0; s < trip.est_pow_W.size(); ++s) {
        out << s << ',' << core::format_double(trip.est_pow_W[s]) << ','
            << core::format_double(trip.cum_energy_J[s]) << ','
            << core::format_double(trip.soc_pct[s]) << '\n';
    }
    if (!out) throw std::runtime_error("write_trip_csv: write failed for " + path);
}

TripEstimate read_trip_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("read_trip_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != "second,est_pow_w,cum_energy_j,soc_pct") {
        throw std::invalid_argument("read_trip_csv: bad header in " + path);
    }
    std::vector<double> pow, cum, soc;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = core::split_csv_line(line);
        if (cells.size() != 4) {
            throw std::invalid_argument("read_trip_csv: bad row in " + path);
        }
        pow.push_back(core::parse_double(cells[1]));
        cum.push_back(core::parse_double(cells[2]));
        soc.push_back(core::parse_double(cells[3]));
    }
    TripEstimate trip;
    trip.est_pow_W = Eigen::Map<const Eigen::VectorXd>(pow.data(), Eigen::Index(pow.size()));
    trip.cum_energy_J =
        Eigen::Map<const Eigen::VectorXd>(cum.data(), Eigen::Index(cum.size()));
    trip.soc_pct = Eigen::Map<const Eigen::VectorXd>(soc.data(), Eigen::Index(soc.size()));
    trip.final_soc_pct = soc.empty() ? 0.0 : soc.back();
    return trip;
}

}  // namespace evrk::pipeline
