// Mini-batch MSE training with Adam.
//
// Determinism contract: for a fixed seed the loss history and final
// parameters are byte-identical regardless of thread count. Shuffles are
// seeded Fisher-Yates per epoch; each sample's dropout stream is derived from
// (seed, epoch, sample index), so masks do not depend on which worker handles
// the sample; per-sample gradients land in per-sample buffers and are summed
// in sample order after the parallel region.
#pragma once

#include <string>
#include <vector>

#include "evrk/pce/model.hpp"

namespace evrk::pce {

struct TrainOptions {
    int epochs = 100;
    int batch_size = 64;
    std::uint64_t seed = 0;
};

struct LossHistory {
    std::vector<double> train_mse;  // one entry per epoch, dropout active
    std::vector<double> valid_mse;  // inference mode, no gradient flow
};

// Trains in place. train/valid hold normalized labeled samples sharing the
// model's NormalizationParams. Throws std::invalid_argument on empty input
// and std::runtime_error with a diagnostic when the loss turns non-finite.
LossHistory train(CnnModel& model, const std::vector<NormalizedSample>& train_set,
                  const std::vector<NormalizedSample>& valid_set, const TrainOptions& options);

// Loss history CSV: header epoch,train_mse,valid_mse, one row per epoch.
void write_loss_history_csv(const std::string& path, const LossHistory& history);
[[nodiscard]] LossHistory read_loss_history_csv(const std::string& path);

// Mean inference-mode MSE over a labeled set.
[[nodiscard]] double mean_loss(const CnnModel& model, const std::vector<NormalizedSample>& set);

}  // namespace evrk::pce
