// Differentiable 1-D layer primitives.
//
// Channel-major layout throughout: a feature map is a matrix with one row per
// channel and one column per time step. Convolutions are cross-correlations
// (no kernel flip) with zero padding of (K−1)/2 on each side, so output
// length equals input length. Weights are im2col-shaped: W has C_out rows and
// C_in·K columns, and column (c·K + k) of the patch matrix holds input
// channel c at tap offset k.
#pragma once

#include <Eigen/Dense>

#include "evrk/core/rng.hpp"

namespace evrk::pce {

// Patch matrix for an input (C_in × L) and kernel width K: (C_in·K × L),
// zero-filled where taps fall outside [0, L).
[[nodiscard]] Eigen::MatrixXd im2col(const Eigen::MatrixXd& input, int kernel);

// Y = W · im2col(X) + b. Throws std::invalid_argument on shape mismatch or
// even kernel widths.
[[nodiscard]] Eigen::MatrixXd conv1d(const Eigen::MatrixXd& input, const Eigen::MatrixXd& weights,
                                     const Eigen::VectorXd& bias);

// Gradients of conv1d given upstream d_out (C_out × L) and the cached patch
// matrix. d_input has the original input shape (C_in × L).
struct ConvGrads {
    Eigen::MatrixXd d_weights;
    Eigen::VectorXd d_bias;
    Eigen::MatrixXd d_input;
};
[[nodiscard]] ConvGrads conv1d_backward(const Eigen::MatrixXd& d_out,
                                        const Eigen::MatrixXd& weights,
                                        const Eigen::MatrixXd& patches, int input_channels);

// Window 2, stride 2, floor semantics; a trailing odd column is dropped.
[[nodiscard]] Eigen::MatrixXd avg_pool(const Eigen::MatrixXd& input);
[[nodiscard]] Eigen::MatrixXd avg_pool_backward(const Eigen::MatrixXd& d_out,
                                                Eigen::Index input_len);

[[nodiscard]] Eigen::MatrixXd relu(const Eigen::MatrixXd& x);
// Mask convention: gradient 0 where the pre-activation was <= 0.
[[nodiscard]] Eigen::MatrixXd relu_backward(const Eigen::MatrixXd& d_out,
                                            const Eigen::MatrixXd& pre_activation);

// Inverted dropout: each element of the mask is 0 with probability p, else
// 1/(1−p). Multiplying by the same mask serves forward and backward.
// Throws std::invalid_argument when p >= 1.
[[nodiscard]] Eigen::MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols, double p,
                                           core::Engine& rng);

}  // namespace evrk::pce
