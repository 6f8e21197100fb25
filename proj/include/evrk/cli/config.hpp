#pragma once

// Experiment configuration: flat `key = value` text with `#` comments.
// Parsing is strict (unknown keys are errors), defaults cover every field,
// and the checksum is computed over the canonical serialization so two
// configs that mean the same thing hash the same regardless of formatting.

#include <cstdint>
#include <string>
#include <vector>

#include "evrk/core/types.hpp"

namespace evrk::cli {

// One axis set of the synthetic generation grid, by profile name.
struct GridSpec {
    std::vector<double> temps_C;
    std::vector<std::string> grades;       // flat | rolling | hill_climb | descent
    std::vector<double> initial_socs;      // percent
    std::vector<std::string> cycles;       // trapezoid | sawtooth | stop_and_go | udds_like
    std::vector<std::string> winds;        // calm | strong_breeze | beaufort<0..7>
    std::vector<std::string> aux;          // off | low | climate
};

struct ExperimentConfig {
    std::uint64_t seed = 1;
    std::string out_dir = ".";

    core::VehicleParams vehicle;

    GridSpec gen{
        {-5.0, 5.0, 15.0, 25.0, 35.0},
        {"flat", "rolling", "hill_climb", "descent"},
        {90.0},
        {"trapezoid", "sawtooth", "stop_and_go", "udds_like"},
        {"calm", "strong_breeze"},
        {"off", "low", "climate"},
    };
    double gen_noise_scale = 1.0;
    bool gen_derating = true;
    double train_fraction = 0.7;

    GridSpec test{
        {0.0, 20.0},
        {"rolling", "descent"},
        {85.0},
        {"trapezoid", "udds_like"},
        {"calm"},
        {"low"},
    };

    int train_epochs = 100;
    int train_batch_size = 64;
    int train_hidden = 128;
    double train_dropout = 0.2;

    std::vector<int> bdt_tree_counts = {5, 10, 20};
    std::vector<int> bdt_max_depths = {4, 8, 16, 0};  // 0 = unbounded
    std::vector<int> bdt_min_leaf_sizes = {1, 5, 20};
    int bdt_k_folds = 5;
    int bdt_tune_max_rows = 4000;  // 0 = tune on every row

    int eval_cv_k = 10;
    int eval_cv_runs = 5;
    int eval_cv_max_windows = 400;  // 0 = no cap
    int eval_cv_epochs = 0;         // 0 = train_epochs
    double eval_alpha = 0.05;
    int eval_timing_reps = 5;
    double eval_min_corr = 0.95;

    // Throws std::invalid_argument naming the offending key/value.
    void validate() const;

    // Stable `key = value` serialization in fixed key order.
    [[nodiscard]] std::string canonical_text() const;

    // FNV-1a (64-bit) over canonical_text(), as 16 lowercase hex digits.
    [[nodiscard]] std::string checksum() const;
};

// Parses config text; keys absent from the text keep their defaults.
// Throws std::invalid_argument on unknown keys, malformed lines, or bad
// values.
[[nodiscard]] ExperimentConfig parse_config_text(const std::string& text);

// parse_config_text over a file's contents; throws when unreadable.
[[nodiscard]] ExperimentConfig load_config(const std::string& path);

// 64-bit FNV-1a of arbitrary bytes (exposed for manifest checks).
[[nodiscard]] std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace evrk::cli
