// Synthetic dataset generation over a parameter grid.
//
// Every grid cell (temperature × grade × initial SOC × cycle × wind × aux)
// is simulated at 10 Hz: the target speed is realized subject to the
// discharge cap (speed bisected down when demand exceeds it), elevation is
// integrated from grade, power comes from the longitudinal model with the
// central-difference acceleration that is also stored as the veh_acc channel,
// and SOC integrates delivered power. Cells are emitted in lexicographic grid
// order; window trip ids equal the cell index. A cell whose battery empties
// mid-cycle is truncated at the last complete window and logged.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evrk/core/types.hpp"
#include "evrk/simgen/power_model.hpp"
#include "evrk/simgen/profiles.hpp"

namespace evrk::simgen {

struct NamedCycle {
    std::string name;
    core::TimeSeries speed;  // 10 Hz
};

struct GenerationGrid {
    std::vector<double> temps_C;
    std::vector<GradeProfile> grade_profiles;  // tiled to cycle length
    std::vector<double> initial_socs;          // percent
    std::vector<NamedCycle> drive_cycles;
    std::vector<WindProfile> wind_profiles;  // 10 Hz, tiled
    std::vector<AuxProfile> aux_profiles;    // 10 Hz, tiled
    std::uint64_t rng_seed = 0;
    bool derating_enabled = true;
    double noise_scale = 1.0;  // 0 disables the smoothed wind/aux jitter
    double air_density = 1.225;
    double gravity = 9.81;

    // Throws std::invalid_argument when any list is empty or a profile has
    // no samples.
    void validate() const;
    [[nodiscard]] std::size_t cardinality() const noexcept;
};

struct GenerationSummary {
    std::size_t cells = 0;
    std::size_t windows = 0;
    std::size_t truncated_cells = 0;
    std::vector<std::string> warnings;
};

// Deterministic for a fixed grid and seed. The summary sink is optional.
[[nodiscard]] core::Dataset generate(const GenerationGrid& grid,
                                     const core::VehicleParams& params,
                                     GenerationSummary* summary = nullptr);

}  // namespace evrk::simgen
