#pragma once

// The four experiment commands behind the CLI verbs. Each writes its
// artifacts under cfg.out_dir, embeds the config checksum and seed in a
// `<verb>_manifest.txt`, logs progress to the given stream, and returns a
// process exit code (0 success; 1 when evaluate's quality thresholds fail).
// Every file a command writes is byte-reproducible for a fixed config+seed;
// the one exception is measured prediction timing (the mptdc columns of the
// comparison outputs), which is wall-clock noise by nature.

#include <iosfwd>
#include <string>

#include "evrk/cli/config.hpp"

namespace evrk::cli {

// Fixed artifact names under out_dir.
inline constexpr const char* kTrainCsv = "train.csv";
inline constexpr const char* kValidCsv = "valid.csv";
inline constexpr const char* kTestCsv = "test.csv";
inline constexpr const char* kCnnModelFile = "cnn_model.pce1";
inline constexpr const char* kFineTunerFile = "fine_tuner.bdt1";
inline constexpr const char* kLossHistoryCsv = "loss_history.csv";
inline constexpr const char* kTuneReportCsv = "tune_report.csv";
inline constexpr const char* kComparisonCsv = "comparison.csv";
inline constexpr const char* kComparisonTxt = "comparison.txt";
inline constexpr const char* kCvCsv = "cv.csv";
inline constexpr const char* kTTestCsv = "ttest.csv";

struct PredictArgs {
    std::string trip_csv;          // dataset-schema CSV; targets optional
    std::string cnn_path;          // empty → out_dir/cnn_model.pce1
    std::string bdt_path;          // empty → out_dir/fine_tuner.bdt1
    std::string out_csv;           // empty → out_dir/trip_estimate.csv
    double initial_soc_pct = -1.0; // < 0 → first window's recorded SOC
    bool no_finetune = false;
};

// Simulates the generation and held-out grids, splits the generation grid
// into train/validation by the configured fraction, and writes the three
// dataset CSVs plus generate_manifest.txt.
int cmd_generate(const ExperimentConfig& cfg, std::ostream& log);

// Trains the CNN on the train split (validation split scored per epoch),
// then tunes and fits the fine tuner on the CNN's training-set outputs;
// writes both model files, loss_history.csv, tune_report.csv, and
// train_manifest.txt (which records the selected tree hyperparameters).
int cmd_train(const ExperimentConfig& cfg, std::ostream& log);

// Runs the full pipeline with SOC feedback over one trip CSV; writes the
// trip-estimate CSV and prints `final_soc_pct=<value>` to the log stream.
int cmd_predict(const ExperimentConfig& cfg, const PredictArgs& args, std::ostream& log);

// Trains the comparison baselines, evaluates every technique on the held-out
// trips, runs repeated k-fold cross-validation of the proposed pipeline, and
// runs one-tailed t-tests (baseline error > proposed error) per baseline on
// per-trip RMSE and energy-deviation samples. Writes comparison.csv/.txt,
// cv.csv, ttest.csv, and evaluate_manifest.txt. Returns 1 when the proposed
// technique misses the ordering/correlation thresholds, 0 otherwise.
int cmd_evaluate(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace evrk::cli
