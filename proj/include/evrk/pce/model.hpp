// Model state, initialization, forward, and the per-sample gradient.
#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Dense>

#include "evrk/core/rng.hpp"
#include "evrk/core/types.hpp"
#include "evrk/pce/arch.hpp"
#include "evrk/prep/normalize.hpp"

namespace evrk::pce {

struct CnnModel {
    ArchDescriptor arch;
    prep::NormalizationParams norm;
    Eigen::VectorXd params;  // flat, ParamLayout order

    [[nodiscard]] ParamLayout layout() const { return ParamLayout::from(arch); }
};

// One training/inference sample in normalized units.
struct NormalizedSample {
    Eigen::MatrixXd channels;  // arch.blocks rows × arch.input_len cols
    double scalar_temp = 0.0;  // used only when arch.append_scalars
    double scalar_soc = 0.0;
    Eigen::VectorXd target;    // outputs-long, empty when unlabeled
};

// Uniform Xavier/Glorot sample on ±sqrt(6/(fan_in+fan_out)).
[[nodiscard]] double xavier_init(int fan_in, int fan_out, core::Engine& rng);

// Weights drawn sequentially in layout order (conv fans count C·K taps);
// biases zero. Deterministic for a fixed seed.
[[nodiscard]] CnnModel init_model(const ArchDescriptor& arch, const prep::NormalizationParams& norm,
                                  std::uint64_t seed);

// Builds the five standard channel rows (veh_sp, road_el, veh_acc, aux_ld,
// wind_sp) plus scalars from a window. Requires bounds for every channel.
// with_target also normalizes act_pow (which must then be present).
[[nodiscard]] NormalizedSample make_sample(const core::PartitionedWindow& w,
                                           const prep::NormalizationParams& norm,
                                           bool with_target);

// Inference-mode forward (no dropout): pure function of (model, sample).
// training=true applies dropout masks drawn from rng (required then).
[[nodiscard]] Eigen::VectorXd forward(const CnnModel& model, const NormalizedSample& sample,
                                      bool training = false, core::Engine* rng = nullptr);

// Forward + backward for one labeled sample. Returns the sample's MSE over
// the outputs and adds the loss gradient into grad (which must be
// layout().total() long and zero-initialized by the caller for a fresh
// gradient). Dropout masks come from rng; pass dropout_p = 0 via the arch to
// disable.
double sample_loss_grad(const CnnModel& model, const NormalizedSample& sample, core::Engine& rng,
                        Eigen::VectorXd& grad);

// MSE of one labeled sample in inference mode.
[[nodiscard]] double sample_loss(const CnnModel& model, const NormalizedSample& sample);

struct AdamState {
    Eigen::VectorXd m;  // first moment
    Eigen::VectorXd v;  // second moment
    std::int64_t step = 0;
    double alpha = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    explicit AdamState(Eigen::Index n)
        : m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}
};

// Bias-corrected Adam update in place. Throws std::invalid_argument on shape
// mismatch or non-finite gradients.
void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamState& state);

}  // namespace evrk::pce
