#include "evrk/cli/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "evrk/baselines/baselines.hpp"
#include "evrk/bdt/bdt.hpp"
#include "evrk/bdt/model_io.hpp"
#include "evrk/core/csv.hpp"
#include "evrk/core/rng.hpp"
#include "evrk/eval/eval.hpp"
#include "evrk/pce/model.hpp"
#include "evrk/pce/model_io.hpp"
#include "evrk/pce/train.hpp"
#include "evrk/pipeline/pipeline.hpp"
#include "evrk/prep/prep.hpp"
#include "evrk/simgen/drive_cycles.hpp"
#include "evrk/simgen/generator.hpp"
#include "evrk/simgen/profiles.hpp"

namespace evrk::cli {
namespace {

namespace fs = std::filesystem;

// Derived-stream tags for the command layer (module-internal streams live in
// their own modules).
constexpr std::uint64_t kGridSeedStream = 0x51;      // index 0 = gen, 1 = test grid
constexpr std::uint64_t kSplitStream = 0x52;         // train/validation membership
constexpr std::uint64_t kCnnInitStream = 0x61;
constexpr std::uint64_t kCnnTrainStream = 0x62;
constexpr std::uint64_t kTuneRowsStream = 0x63;      // tuning-row subsample
constexpr std::uint64_t kTuneStream = 0x64;
constexpr std::uint64_t kBaggingStream = 0x65;
constexpr std::uint64_t kModiInitStream = 0x66;
constexpr std::uint64_t kModiTrainStream = 0x67;
constexpr std::uint64_t kCvSampleStream = 0x68;      // CV window subsample
constexpr std::uint64_t kCvStream = 0x69;            // repeated k-fold master

constexpr Eigen::Index kProfileSamples = 1200;  // tiled to cycle length by simgen

std::string path_join(const std::string& dir, const char* name) {
    return (fs::path(dir) / name).string();
}

void write_manifest(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& entries) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("manifest: cannot open " + path);
    for (const auto& [key, value] : entries) {
        out << key << " = " << value << '\n';
    }
    if (!out) throw std::runtime_error("manifest: write failed for " + path);
}

std::map<std::string, std::string> read_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("manifest: cannot open " + path);
    std::map<std::string, std::string> entries;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) continue;
        entries[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return entries;
}

simgen::GradeProfile grade_by_name(const std::string& name) {
    if (name == "flat") return simgen::grade_flat(kProfileSamples);
    if (name == "rolling") return simgen::grade_rolling(kProfileSamples);
    if (name == "hill_climb") return simgen::grade_hill_climb(kProfileSamples);
    if (name == "descent") return simgen::grade_descent(kProfileSamples);
    throw std::invalid_argument("unknown grade profile '" + name + "'");
}

simgen::WindProfile wind_by_name(const std::string& name) {
    if (name == "calm") return simgen::wind_calm(kProfileSamples);
    if (name == "strong_breeze") return simgen::wind_strong_breeze(kProfileSamples);
    if (name.rfind("beaufort", 0) == 0 && name.size() == 9) {
        return simgen::wind_for_class(name[8] - '0', kProfileSamples);
    }
    throw std::invalid_argument("unknown wind profile '" + name + "'");
}

simgen::AuxProfile aux_by_name(const std::string& name) {
    if (name == "off") return simgen::aux_off(kProfileSamples);
    if (name == "low") return simgen::aux_low(kProfileSamples);
    if (name == "climate") return simgen::aux_climate(kProfileSamples);
    throw std::invalid_argument("unknown aux profile '" + name + "'");
}

simgen::DriveCycle cycle_by_name(const std::string& name) {
    if (name == "trapezoid") return simgen::trapezoid_cycle();
    if (name == "sawtooth") return simgen::sawtooth_cycle();
    if (name == "stop_and_go") return simgen::stop_and_go_cycle();
    if (name == "udds_like") return simgen::udds_like_cycle();
    throw std::invalid_argument("unknown drive cycle '" + name + "'");
}

simgen::GenerationGrid build_grid(const GridSpec& spec, const ExperimentConfig& cfg,
                                  std::uint64_t grid_seed) {
    simgen::GenerationGrid grid;
    grid.temps_C = spec.temps_C;
    for (const auto& g : spec.grades) grid.grade_profiles.push_back(grade_by_name(g));
    grid.initial_socs = spec.initial_socs;
    for (const auto& c : spec.cycles) {
        const auto cycle = cycle_by_name(c);
        grid.drive_cycles.push_back({cycle.name, simgen::sample_cycle(cycle, 10.0)});
    }
    for (const auto& w : spec.winds) grid.wind_profiles.push_back(wind_by_name(w));
    for (const auto& a : spec.aux) grid.aux_profiles.push_back(aux_by_name(a));
    grid.rng_seed = grid_seed;
    grid.derating_enabled = cfg.gen_derating;
    grid.noise_scale = cfg.gen_noise_scale;
    grid.validate();
    return grid;
}

// Seeded random membership; each split keeps the original window order.
std::pair<core::Dataset, core::Dataset> split_dataset(const core::Dataset& ds,
                                                      double fraction,
                                                      core::Engine& rng) {
    const auto n = ds.windows.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    core::shuffle_in_place(order, rng);
    auto train_n = static_cast<std::size_t>(
        std::llround(static_cast<double>(n) * fraction));
    train_n = std::clamp<std::size_t>(train_n, 1, n - 1);

    std::vector<char> in_train(n, 0);
    for (std::size_t i = 0; i < train_n; ++i) in_train[order[i]] = 1;

    core::Dataset train, valid;
    train.provenance = "generation grid, train split";
    valid.provenance = "generation grid, validation split";
    for (std::size_t i = 0; i < n; ++i) {
        auto& dst = in_train[i] ? train : valid;
        dst.windows.push_back(ds.windows[i]);
        if (!ds.trip_ids.empty()) dst.trip_ids.push_back(ds.trip_ids[i]);
    }
    return {std::move(train), std::move(valid)};
}

core::Dataset read_dataset_or_hint(const std::string& path) {
    if (!fs::exists(path)) {
        throw std::invalid_argument("missing dataset " + path +
                                    " (run `evrk generate` first)");
    }
    return core::read_dataset_csv(path);
}

// Windows grouped into trips by the trip-id sidecar, in file order; a dataset
// without ids is one trip.
std::vector<eval::Trip> group_trips(const core::Dataset& ds) {
    std::vector<eval::Trip> trips;
    std::vector<std::int64_t> ids;
    for (std::size_t i = 0; i < ds.windows.size(); ++i) {
        const std::int64_t id = ds.trip_ids.empty() ? 0 : ds.trip_ids[i];
        std::size_t at = trips.size();
        for (std::size_t t = 0; t < ids.size(); ++t) {
            if (ids[t] == id) {
                at = t;
                break;
            }
        }
        if (at == trips.size()) {
            ids.push_back(id);
            trips.emplace_back();
            trips.back().initial_soc_pct = ds.windows[i].batt_soc;
        }
        trips[at].windows.push_back(ds.windows[i]);
    }
    return trips;
}

// Per-second fine-tuner design rows for a window list: the seven resampled
// channels plus the CNN estimate, targets in raw watts.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> finetuner_rows(
    const std::vector<core::PartitionedWindow>& windows, const pce::CnnModel& cnn) {
    const auto n = static_cast<Eigen::Index>(windows.size()) * core::kWindowSeconds;
    Eigen::MatrixXd rows(n, 8);
    Eigen::VectorXd targets(n);
    const auto& pow_bounds = cnn.norm.at(prep::Channel::ActPow);
    Eigen::Index at = 0;
    for (const auto& w : windows) {
        const auto features = prep::resample_window(w);
        const pce::NormalizedSample sample = pce::make_sample(w, cnn.norm, false);
        const Eigen::VectorXd est = pce::forward(cnn, sample);
        for (Eigen::Index s = 0; s < core::kWindowSeconds; ++s, ++at) {
            rows.block<1, 7>(at, 0) = features.row(s);
            rows(at, 7) = prep::denormalize_scalar(est[s], pow_bounds);
            targets[at] = (*w.act_pow)[s];
        }
    }
    return {std::move(rows), std::move(targets)};
}

Eigen::VectorXd actual_seconds_of(const eval::Trip& trip) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(trip.windows.size()) *
                        core::kWindowSeconds);
    Eigen::Index at = 0;
    for (const auto& w : trip.windows) {
        out.segment(at, core::kWindowSeconds) = *w.act_pow;
        at += core::kWindowSeconds;
    }
    return out;
}

double actual_energy_J_of(const eval::Trip& trip) {
    double e = 0.0;
    for (const auto& w : trip.windows) e += w.act_pow->sum();
    return e;
}

core::TimeSeries trip_speed_series(const std::vector<core::PartitionedWindow>& windows) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(windows.size()) * core::kWindowSamples);
    Eigen::Index at = 0;
    for (const auto& w : windows) {
        v.segment(at, core::kWindowSamples) = w.veh_sp;
        at += core::kWindowSamples;
    }
    return core::TimeSeries(std::move(v), core::kRawRateHz, core::Unit::MetersPerSecond);
}

std::string yes_no(bool v) { return v ? "1" : "0"; }

}  // namespace

int cmd_generate(const ExperimentConfig& cfg, std::ostream& log) {
    cfg.validate();
    fs::create_directories(cfg.out_dir);

    const auto gen_grid =
        build_grid(cfg.gen, cfg, core::derived_engine(cfg.seed, kGridSeedStream, 0)());
    simgen::GenerationSummary gen_sum;
    const core::Dataset generated = simgen::generate(gen_grid, cfg.vehicle, &gen_sum);
    if (generated.windows.empty()) {
        throw std::runtime_error("generate: the generation grid produced no windows");
    }

    auto split_rng = core::derived_engine(cfg.seed, kSplitStream, 0);
    auto [train, valid] = split_dataset(generated, cfg.train_fraction, split_rng);

    const auto test_grid =
        build_grid(cfg.test, cfg, core::derived_engine(cfg.seed, kGridSeedStream, 1)());
    simgen::GenerationSummary test_sum;
    core::Dataset test = simgen::generate(test_grid, cfg.vehicle, &test_sum);
    test.provenance = "held-out grid";
    if (test.windows.empty()) {
        throw std::runtime_error("generate: the held-out grid produced no windows");
    }

    core::write_dataset_csv(path_join(cfg.out_dir, kTrainCsv), train);
    core::write_dataset_csv(path_join(cfg.out_dir, kValidCsv), valid);
    core::write_dataset_csv(path_join(cfg.out_dir, kTestCsv), test);

    std::vector<std::pair<std::string, std::string>> manifest = {
        {"artifact", "generate"},
        {"config_checksum", cfg.checksum()},
        {"seed", std::to_string(cfg.seed)},
        {"grid_cells", std::to_string(gen_sum.cells)},
        {"grid_windows", std::to_string(gen_sum.windows)},
        {"grid_truncated_cells", std::to_string(gen_sum.truncated_cells)},
        {"train_windows", std::to_string(train.windows.size())},
        {"valid_windows", std::to_string(valid.windows.size())},
        {"train_fraction", core::format_double(cfg.train_fraction)},
        {"valid_fraction", core::format_double(1.0 - cfg.train_fraction)},
        {"test_cells", std::to_string(test_sum.cells)},
        {"test_windows", std::to_string(test.windows.size())},
        {"test_truncated_cells", std::to_string(test_sum.truncated_cells)},
        {"files", std::string(kTrainCsv) + "," + kValidCsv + "," + kTestCsv},
    };
    std::size_t warn_at = 0;
    for (const auto& w : gen_sum.warnings) {
        manifest.emplace_back("warning." + std::to_string(warn_at++), "gen: " + w);
    }
    for (const auto& w : test_sum.warnings) {
        manifest.emplace_back("warning." + std::to_string(warn_at++), "test: " + w);
    }
    manifest.emplace_back("warning_count", std::to_string(warn_at));
    write_manifest(path_join(cfg.out_dir, "generate_manifest.txt"), manifest);

    log << "generated " << generated.windows.size() << " windows over " << gen_sum.cells
        << " cells -> " << train.windows.size() << " train / " << valid.windows.size()
        << " valid; held-out " << test.windows.size() << " windows over "
        << test_sum.cells << " cells (" << warn_at << " warnings)\n";
    return 0;
}

int cmd_train(const ExperimentConfig& cfg, std::ostream& log) {
    cfg.validate();
    const core::Dataset train_ds = read_dataset_or_hint(path_join(cfg.out_dir, kTrainCsv));
    const core::Dataset valid_ds = read_dataset_or_hint(path_join(cfg.out_dir, kValidCsv));
    for (const auto* ds : {&train_ds, &valid_ds}) {
        for (const auto& w : ds->windows) {
            if (!w.act_pow) throw std::invalid_argument("train: dataset has unlabeled windows");
        }
    }

    const prep::NormalizationParams norm = prep::fit_normalization(train_ds);
    std::vector<pce::NormalizedSample> train_samples, valid_samples;
    train_samples.reserve(train_ds.windows.size());
    valid_samples.reserve(valid_ds.windows.size());
    for (const auto& w : train_ds.windows) {
        train_samples.push_back(pce::make_sample(w, norm, true));
    }
    for (const auto& w : valid_ds.windows) {
        valid_samples.push_back(pce::make_sample(w, norm, true));
    }

    pce::ArchDescriptor arch;
    arch.hidden = cfg.train_hidden;
    arch.dropout_p = cfg.train_dropout;
    pce::CnnModel cnn =
        pce::init_model(arch, norm, core::derived_engine(cfg.seed, kCnnInitStream, 0)());

    pce::TrainOptions opts;
    opts.epochs = cfg.train_epochs;
    opts.batch_size = cfg.train_batch_size;
    opts.seed = core::derived_engine(cfg.seed, kCnnTrainStream, 0)();
    log << "training estimator: " << train_samples.size() << " train / "
        << valid_samples.size() << " valid windows, " << opts.epochs << " epochs\n";
    const pce::LossHistory history = pce::train(cnn, train_samples, valid_samples, opts);
    pce::write_loss_history_csv(path_join(cfg.out_dir, kLossHistoryCsv), history);
    pce::save_model(path_join(cfg.out_dir, kCnnModelFile), cnn);

    auto [rows, targets] = finetuner_rows(train_ds.windows, cnn);
    Eigen::MatrixXd tune_rows = rows;
    Eigen::VectorXd tune_targets = targets;
    if (cfg.bdt_tune_max_rows > 0 &&
        rows.rows() > static_cast<Eigen::Index>(cfg.bdt_tune_max_rows)) {
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(rows.rows()));
        std::iota(idx.begin(), idx.end(), Eigen::Index{0});
        auto rng = core::derived_engine(cfg.seed, kTuneRowsStream, 0);
        core::shuffle_in_place(idx, rng);
        idx.resize(static_cast<std::size_t>(cfg.bdt_tune_max_rows));
        std::sort(idx.begin(), idx.end());  // keep original row order
        tune_rows.resize(cfg.bdt_tune_max_rows, rows.cols());
        tune_targets.resize(cfg.bdt_tune_max_rows);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            tune_rows.row(static_cast<Eigen::Index>(i)) = rows.row(idx[i]);
            tune_targets[static_cast<Eigen::Index>(i)] = targets[idx[i]];
        }
    }

    bdt::SearchSpace space;
    space.tree_counts = cfg.bdt_tree_counts;
    space.max_depths = cfg.bdt_max_depths;
    space.min_leaf_sizes = cfg.bdt_min_leaf_sizes;
    log << "tuning fine tuner on " << tune_rows.rows() << " of " << rows.rows()
        << " rows\n";
    const bdt::TuneResult tuned =
        bdt::tune_hyperparams(tune_rows, tune_targets, cfg.bdt_k_folds, space,
                              core::derived_engine(cfg.seed, kTuneStream, 0)());

    bdt::BdtModel tuner = bdt::fit_bagged(
        rows, targets, tuned.best.n_trees, tuned.best.max_depth, tuned.best.min_leaf_size,
        core::derived_engine(cfg.seed, kBaggingStream, 0)());
    tuner.feature_names.assign(bdt::kFineTunerFeatureNames.begin(),
                               bdt::kFineTunerFeatureNames.end());
    bdt::save_model(path_join(cfg.out_dir, kFineTunerFile), tuner);

    {
        std::ofstream out(path_join(cfg.out_dir, kTuneReportCsv),
                          std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("train: cannot open tune report");
        out << "n_trees,max_depth,min_leaf_size,cv_rmse_w\n";
        for (const auto& row : tuned.report) {
            out << row.candidate.n_trees << ',' << row.candidate.max_depth << ','
                << row.candidate.min_leaf_size << ',' << core::format_double(row.cv_rmse)
                << '\n';
        }
    }

    write_manifest(
        path_join(cfg.out_dir, "train_manifest.txt"),
        {
            {"artifact", "train"},
            {"config_checksum", cfg.checksum()},
            {"seed", std::to_string(cfg.seed)},
            {"train_windows", std::to_string(train_ds.windows.size())},
            {"valid_windows", std::to_string(valid_ds.windows.size())},
            {"epochs", std::to_string(cfg.train_epochs)},
            {"batch_size", std::to_string(cfg.train_batch_size)},
            {"hidden", std::to_string(cfg.train_hidden)},
            {"dropout", core::format_double(cfg.train_dropout)},
            {"final_train_mse", core::format_double(history.train_mse.back())},
            {"final_valid_mse", core::format_double(history.valid_mse.back())},
            {"bdt.tune_rows", std::to_string(tune_rows.rows())},
            {"bdt.best_n_trees", std::to_string(tuned.best.n_trees)},
            {"bdt.best_max_depth", std::to_string(tuned.best.max_depth)},
            {"bdt.best_min_leaf_size", std::to_string(tuned.best.min_leaf_size)},
            {"files", std::string(kCnnModelFile) + "," + kFineTunerFile + "," +
                          kLossHistoryCsv + "," + kTuneReportCsv},
        });

    log << "trained: final train mse " << core::format_double(history.train_mse.back())
        << ", valid mse " << core::format_double(history.valid_mse.back())
        << "; fine tuner " << tuned.best.n_trees << " trees, depth "
        << tuned.best.max_depth << ", min leaf " << tuned.best.min_leaf_size << "\n";
    return 0;
}

int cmd_predict(const ExperimentConfig& cfg, const PredictArgs& args, std::ostream& log) {
    cfg.validate();
    if (args.trip_csv.empty()) throw std::invalid_argument("predict: --trip is required");

    const std::string cnn_path =
        args.cnn_path.empty() ? path_join(cfg.out_dir, kCnnModelFile) : args.cnn_path;
    const std::string bdt_path =
        args.bdt_path.empty() ? path_join(cfg.out_dir, kFineTunerFile) : args.bdt_path;
    const std::string out_csv =
        args.out_csv.empty() ? path_join(cfg.out_dir, "trip_estimate.csv") : args.out_csv;

    const pce::CnnModel cnn = pce::load_model(cnn_path);
    pipeline::EstimateOptions opts;
    opts.use_fine_tuner = !args.no_finetune;
    opts.capacity_J = cfg.vehicle.battery_capacity_J;

    bdt::BdtModel tuner;
    if (opts.use_fine_tuner) tuner = bdt::load_model(bdt_path);

    const core::Dataset trip_ds = core::read_dataset_csv(args.trip_csv);
    if (trip_ds.windows.empty()) {
        throw std::invalid_argument("predict: trip CSV has no windows");
    }
    const double initial = args.initial_soc_pct >= 0.0 ? args.initial_soc_pct
                                                       : trip_ds.windows.front().batt_soc;

    const pipeline::TripEstimate trip = pipeline::estimate_trip(
        cnn, opts.use_fine_tuner ? &tuner : nullptr, trip_ds.windows, initial, opts);
    pipeline::write_trip_csv(out_csv, trip);

    write_manifest(path_join(cfg.out_dir, "predict_manifest.txt"),
                   {
                       {"artifact", "predict"},
                       {"config_checksum", cfg.checksum()},
                       {"seed", std::to_string(cfg.seed)},
                       {"trip_csv", args.trip_csv},
                       {"windows", std::to_string(trip_ds.windows.size())},
                       {"initial_soc_pct", core::format_double(initial)},
                       {"fine_tuner", yes_no(opts.use_fine_tuner)},
                       {"final_soc_pct", core::format_double(trip.final_soc_pct)},
                       {"soc_saturated", yes_no(trip.soc_saturated)},
                       {"files", fs::path(out_csv).filename().string()},
                   });

    log << "final_soc_pct=" << core::format_double(trip.final_soc_pct) << "\n";
    return 0;
}

int cmd_evaluate(const ExperimentConfig& cfg, std::ostream& log) {
    cfg.validate();
    const core::Dataset train_ds = read_dataset_or_hint(path_join(cfg.out_dir, kTrainCsv));
    const core::Dataset valid_ds = read_dataset_or_hint(path_join(cfg.out_dir, kValidCsv));
    const core::Dataset test_ds = read_dataset_or_hint(path_join(cfg.out_dir, kTestCsv));
    const pce::CnnModel cnn = pce::load_model(path_join(cfg.out_dir, kCnnModelFile));
    bdt::BdtModel tuner = bdt::load_model(path_join(cfg.out_dir, kFineTunerFile));

    const auto train_manifest =
        read_manifest(path_join(cfg.out_dir, "train_manifest.txt"));
    bdt::TreeHyperparams hyper;
    try {
        hyper.n_trees = std::stoi(train_manifest.at("bdt.best_n_trees"));
        hyper.max_depth = std::stoi(train_manifest.at("bdt.best_max_depth"));
        hyper.min_leaf_size = std::stoi(train_manifest.at("bdt.best_min_leaf_size"));
    } catch (const std::out_of_range&) {
        throw std::invalid_argument(
            "evaluate: train_manifest.txt lacks the tuned tree hyperparameters "
            "(run `evrk train` first)");
    }

    const std::vector<eval::Trip> trips = group_trips(test_ds);
    if (trips.empty()) throw std::invalid_argument("evaluate: no held-out trips");

    const core::VehicleParams params = cfg.vehicle;
    core::EnvConditions env;  // scalar constants; per-trip profiles are in the data

    pipeline::EstimateOptions pipe_opts;
    pipe_opts.capacity_J = cfg.vehicle.battery_capacity_J;

    // --- techniques -------------------------------------------------------
    eval::TechniqueEval proposed;
    proposed.name = "cnn_bdt";
    proposed.estimate_seconds = [&cnn, &tuner, pipe_opts](const eval::Trip& trip) {
        return pipeline::estimate_trip(cnn, &tuner, trip.windows, trip.initial_soc_pct,
                                       pipe_opts)
            .est_pow_W;
    };

    eval::TechniqueEval galvin;
    galvin.name = "galvin";
    galvin.estimate_seconds = [](const eval::Trip& trip) {
        Eigen::VectorXd out(static_cast<Eigen::Index>(trip.windows.size()) *
                            core::kWindowSeconds);
        Eigen::Index at = 0;
        for (const auto& w : trip.windows) {
            const auto f = prep::resample_window(w);
            for (Eigen::Index s = 0; s < core::kWindowSeconds; ++s, ++at) {
                out[at] = baselines::galvin_power(f(s, 0), f(s, 2));
            }
        }
        return out;
    };

    eval::TechniqueEval yang;
    yang.name = "yang";
    yang.estimate_seconds = [&params, &env](const eval::Trip& trip) {
        Eigen::VectorXd out(static_cast<Eigen::Index>(trip.windows.size()) *
                            core::kWindowSeconds);
        Eigen::Index at = 0;
        for (const auto& w : trip.windows) {
            const auto f = prep::resample_window(w);
            const Eigen::VectorXd grade10 =
                prep::grade_from_elevation(w.road_el, w.veh_sp, core::kRawRateHz);
            for (Eigen::Index s = 0; s < core::kWindowSeconds; ++s, ++at) {
                const double grade = grade10.segment(10 * s, 10).mean();
                out[at] =
                    baselines::yang_power(f(s, 0), f(s, 2), grade, params, env, f(s, 3));
            }
        }
        return out;
    };

    const std::vector<eval::Trip> train_trips = group_trips(train_ds);
    std::vector<baselines::TripStats> trip_stats;
    Eigen::VectorXd trip_energies(static_cast<Eigen::Index>(train_trips.size()));
    for (std::size_t t = 0; t < train_trips.size(); ++t) {
        trip_stats.push_back(
            baselines::alvarez_features(trip_speed_series(train_trips[t].windows)));
        trip_energies[static_cast<Eigen::Index>(t)] = actual_energy_J_of(train_trips[t]);
    }
    const baselines::AffineTripModel affine =
        baselines::alvarez_fit(trip_stats, trip_energies);
    if (affine.underdetermined) {
        log << "note: trip-statistics baseline fit is underdetermined ("
            << train_trips.size() << " training trips for 15 parameters)\n";
    }
    eval::TechniqueEval alvarez;
    alvarez.name = "alvarez";
    alvarez.per_second = false;
    alvarez.estimate_trip_energy = [&affine](const eval::Trip& trip) {
        return baselines::alvarez_predict(
            affine, baselines::alvarez_features(trip_speed_series(trip.windows)));
    };

    // 3-channel convolutional baseline, trained here with the same budget.
    prep::NormalizationParams modi_norm;
    {
        const prep::NormalizationParams full = prep::fit_normalization(train_ds);
        for (const auto c :
             {prep::Channel::RoadEl, prep::Channel::VehSp, prep::Channel::ActPow}) {
            modi_norm.set(c, full.at(c).min, full.at(c).max);
        }
        const auto effort = baselines::fit_effort_bounds(train_ds, params, env);
        modi_norm.set(prep::Channel::TractiveEffort, effort.min, effort.max);
    }
    pce::ArchDescriptor modi_arch = baselines::modi_arch();
    modi_arch.hidden = cfg.train_hidden;
    modi_arch.dropout_p = cfg.train_dropout;
    pce::CnnModel modi_model = pce::init_model(
        modi_arch, modi_norm, core::derived_engine(cfg.seed, kModiInitStream, 0)());
    {
        std::vector<pce::NormalizedSample> modi_samples;
        modi_samples.reserve(train_ds.windows.size());
        for (const auto& w : train_ds.windows) {
            modi_samples.push_back(
                baselines::make_modi_sample(w, modi_norm, true, params, env));
        }
        pce::TrainOptions opts;
        opts.epochs = cfg.train_epochs;
        opts.batch_size = cfg.train_batch_size;
        opts.seed = core::derived_engine(cfg.seed, kModiTrainStream, 0)();
        log << "training 3-channel baseline: " << modi_samples.size() << " windows, "
            << opts.epochs << " epochs\n";
        // Per-epoch validation is not consumed for the baseline; score one
        // sample to satisfy the trainer's non-empty contract cheaply.
        (void)pce::train(modi_model, modi_samples, {modi_samples.front()}, opts);
    }
    eval::TechniqueEval modi;
    modi.name = "modi";
    modi.estimate_seconds = [&modi_model, &modi_norm, &params, &env](const eval::Trip& trip) {
        Eigen::VectorXd out(static_cast<Eigen::Index>(trip.windows.size()) *
                            core::kWindowSeconds);
        const auto& bounds = modi_model.norm.at(prep::Channel::ActPow);
        Eigen::Index at = 0;
        for (const auto& w : trip.windows) {
            const auto sample = baselines::make_modi_sample(w, modi_norm, false, params, env);
            const Eigen::VectorXd est = pce::forward(modi_model, sample);
            for (Eigen::Index s = 0; s < est.size(); ++s, ++at) {
                out[at] = prep::denormalize_scalar(est[s], bounds);
            }
        }
        return out;
    };

    const std::vector<eval::TechniqueEval> techniques = {proposed, galvin, yang, alvarez,
                                                         modi};
    log << "comparing " << techniques.size() << " techniques on " << trips.size()
        << " held-out trips\n";
    const auto rows = eval::comparison_table(techniques, trips, cfg.eval_timing_reps);
    eval::write_comparison_csv(path_join(cfg.out_dir, kComparisonCsv), rows);
    const std::string pretty = eval::format_comparison(rows);
    {
        std::ofstream out(path_join(cfg.out_dir, kComparisonTxt),
                          std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("evaluate: cannot open comparison text");
        out << pretty;
    }
    log << pretty;

    // --- repeated k-fold CV of the proposed pipeline -----------------------
    std::vector<core::PartitionedWindow> cv_windows = train_ds.windows;
    cv_windows.insert(cv_windows.end(), valid_ds.windows.begin(), valid_ds.windows.end());
    if (cfg.eval_cv_max_windows > 0 &&
        cv_windows.size() > static_cast<std::size_t>(cfg.eval_cv_max_windows)) {
        auto rng = core::derived_engine(cfg.seed, kCvSampleStream, 0);
        core::shuffle_in_place(cv_windows, rng);
        cv_windows.resize(static_cast<std::size_t>(cfg.eval_cv_max_windows));
    }
    const int cv_epochs = cfg.eval_cv_epochs > 0 ? cfg.eval_cv_epochs : cfg.train_epochs;
    const int batch = cfg.train_batch_size;
    const double capacity = cfg.vehicle.battery_capacity_J;
    const pce::ArchDescriptor cv_arch = [&] {
        pce::ArchDescriptor a;
        a.hidden = cfg.train_hidden;
        a.dropout_p = cfg.train_dropout;
        return a;
    }();
    const eval::Trainer trainer = [cv_epochs, batch, capacity, cv_arch, hyper](
                                      const std::vector<core::PartitionedWindow>& tw,
                                      std::uint64_t tseed) -> eval::PerSecondPredictor {
        core::Dataset fold_ds;
        fold_ds.windows = tw;
        const prep::NormalizationParams norm = prep::fit_normalization(fold_ds);
        std::vector<pce::NormalizedSample> samples;
        samples.reserve(tw.size());
        for (const auto& w : tw) samples.push_back(pce::make_sample(w, norm, true));

        auto model = std::make_shared<pce::CnnModel>(
            pce::init_model(cv_arch, norm, core::derived_engine(tseed, 1, 0)()));
        pce::TrainOptions opts;
        opts.epochs = cv_epochs;
        opts.batch_size = batch;
        opts.seed = core::derived_engine(tseed, 2, 0)();
        (void)pce::train(*model, samples, {samples.front()}, opts);

        auto [rows, targets] = finetuner_rows(tw, *model);
        auto fold_tuner = std::make_shared<bdt::BdtModel>(
            bdt::fit_bagged(rows, targets, hyper.n_trees, hyper.max_depth,
                            hyper.min_leaf_size, core::derived_engine(tseed, 3, 0)()));
        pipeline::EstimateOptions opts_pipe;
        opts_pipe.capacity_J = capacity;
        return [model, fold_tuner, opts_pipe](const core::PartitionedWindow& w) {
            return pipeline::estimate_trip(*model, fold_tuner.get(), {w}, w.batt_soc,
                                           opts_pipe)
                .est_pow_W;
        };
    };
    log << "cross-validating: " << cv_windows.size() << " windows, " << cfg.eval_cv_runs
        << " runs x " << cfg.eval_cv_k << " folds, " << cv_epochs << " epochs per fold\n";
    const auto cv_reports =
        eval::repeated_kfold(cv_windows, cfg.eval_cv_k, cfg.eval_cv_runs, trainer,
                             core::derived_engine(cfg.seed, kCvStream, 0)());
    eval::write_cv_csv(path_join(cfg.out_dir, kCvCsv), cv_reports);

    // --- pairwise t-tests on per-trip error samples -------------------------
    const auto trip_count = static_cast<Eigen::Index>(trips.size());
    std::map<std::string, Eigen::VectorXd> rmse_samples, dev_samples;
    for (const auto& tech : techniques) {
        Eigen::VectorXd rmse_s(trip_count), dev_s(trip_count);
        for (Eigen::Index t = 0; t < trip_count; ++t) {
            const auto& trip = trips[static_cast<std::size_t>(t)];
            const double actual_MJ = actual_energy_J_of(trip) / 1e6;
            if (tech.per_second) {
                const Eigen::VectorXd est = tech.estimate_seconds(trip);
                rmse_s[t] = eval::rmse(actual_seconds_of(trip), est);
                const double est_MJ = tech.estimate_trip_energy
                                          ? tech.estimate_trip_energy(trip) / 1e6
                                          : est.sum() / 1e6;
                dev_s[t] = std::abs(actual_MJ - est_MJ);
            } else {
                dev_s[t] = std::abs(actual_MJ - tech.estimate_trip_energy(trip) / 1e6);
            }
        }
        if (tech.per_second) rmse_samples[tech.name] = std::move(rmse_s);
        dev_samples[tech.name] = std::move(dev_s);
    }
    {
        std::ofstream out(path_join(cfg.out_dir, kTTestCsv),
                          std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("evaluate: cannot open t-test report");
        out << "baseline,metric,t_stat,df,p_one_tail,reject\n";
        if (trips.size() >= 2) {
            const auto emit = [&](const std::string& baseline, const char* metric,
                                  const Eigen::VectorXd& base_sample,
                                  const Eigen::VectorXd& prop_sample) {
                const auto r = eval::t_test(base_sample, prop_sample, cfg.eval_alpha);
                out << baseline << ',' << metric << ',';
                if (r.defined) {
                    out << core::format_double(r.t_stat) << ',' << r.df << ','
                        << core::format_double(r.p_one_tail) << ',' << (r.reject ? 1 : 0);
                } else {
                    out << "NA," << r.df << ",NA,0";
                }
                out << '\n';
            };
            for (const auto& name : {"galvin", "yang", "modi"}) {
                emit(name, "rmse_w", rmse_samples.at(name), rmse_samples.at("cnn_bdt"));
            }
            for (const auto& name : {"galvin", "yang", "alvarez", "modi"}) {
                emit(name, "mae_dev_mj", dev_samples.at(name), dev_samples.at("cnn_bdt"));
            }
        }
    }
    if (trips.size() < 2) {
        log << "note: fewer than 2 held-out trips; t-tests skipped\n";
    }

    // --- quality thresholds -------------------------------------------------
    const auto row_of = [&rows](const std::string& name) -> const eval::ComparisonRow& {
        for (const auto& r : rows) {
            if (r.technique == name) return r;
        }
        throw std::logic_error("evaluate: missing comparison row " + name);
    };
    const auto& prop_row = row_of("cnn_bdt");
    std::vector<std::string> verdicts;
    bool ok = true;
    const auto check = [&](bool pass, const std::string& what) {
        verdicts.push_back((pass ? std::string("pass: ") : std::string("FAIL: ")) + what);
        ok = ok && pass;
    };
    for (const auto& name : {"galvin", "yang", "modi"}) {
        check(prop_row.rmse_W < row_of(name).rmse_W,
              "rmse(cnn_bdt) < rmse(" + std::string(name) + ")");
        check(prop_row.mae_dev_MJ < row_of(name).mae_dev_MJ,
              "mae_dev(cnn_bdt) < mae_dev(" + std::string(name) + ")");
    }
    check(prop_row.mae_dev_MJ < row_of("alvarez").mae_dev_MJ,
          "mae_dev(cnn_bdt) < mae_dev(alvarez)");
    check(prop_row.corr.defined && prop_row.corr.value >= cfg.eval_min_corr,
          "corr(cnn_bdt) >= " + core::format_double(cfg.eval_min_corr));

    std::vector<std::pair<std::string, std::string>> manifest = {
        {"artifact", "evaluate"},
        {"config_checksum", cfg.checksum()},
        {"seed", std::to_string(cfg.seed)},
        {"held_out_trips", std::to_string(trips.size())},
        {"train_trips", std::to_string(train_trips.size())},
        {"cv_windows", std::to_string(cv_windows.size())},
        {"cv_runs", std::to_string(cfg.eval_cv_runs)},
        {"cv_k", std::to_string(cfg.eval_cv_k)},
        {"cv_epochs", std::to_string(cv_epochs)},
        {"bdt.n_trees", std::to_string(hyper.n_trees)},
        {"bdt.max_depth", std::to_string(hyper.max_depth)},
        {"bdt.min_leaf_size", std::to_string(hyper.min_leaf_size)},
        {"alvarez_underdetermined", yes_no(affine.underdetermined)},
        {"files", std::string(kComparisonCsv) + "," + kComparisonTxt + "," + kCvCsv +
                      "," + kTTestCsv},
        {"timing_note", "mptdc cells are wall-clock measurements and vary run to run"},
    };
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        manifest.emplace_back("threshold." + std::to_string(i), verdicts[i]);
    }
    manifest.emplace_back("thresholds_ok", yes_no(ok));
    write_manifest(path_join(cfg.out_dir, "evaluate_manifest.txt"), manifest);

    for (const auto& v : verdicts) log << v << "\n";
    log << (ok ? "all quality thresholds met\n" : "quality thresholds FAILED\n");
    return ok ? 0 : 1;
}

}  // namespace evrk::cli
