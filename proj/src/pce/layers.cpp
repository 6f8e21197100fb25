#include "evrk/pce/layers.hpp"

#include <stdexcept>

namespace evrk::pce {

Eigen::MatrixXd im2col(const Eigen::MatrixXd& input, int kernel) {
    if (kernel < 1 || kernel % 2 == 0) {
        throw std::invalid_argument("im2col: kernel must be odd and positive");
    }
    const Eigen::Index c_in = input.rows();
    const Eigen::Index len = input.cols();
    const Eigen::Index pad = (kernel - 1) / 2;
    Eigen::MatrixXd patches = Eigen::MatrixXd::Zero(c_in * kernel, len);
    for (Eigen::Index c = 0; c < c_in; ++c) {
        for (Eigen::Index k = 0; k < kernel; ++k) {
            const Eigen::Index shift = k - pad;  // input column = t + shift
            const Eigen::Index t_lo = std::max<Eigen::Index>(0, -shift);
            const Eigen::Index t_hi = std::min(len, len - shift);
            if (t_hi > t_lo) {
                patches.row(c * kernel + k).segment(t_lo, t_hi - t_lo) =
                    input.row(c).segment(t_lo + shift, t_hi - t_lo);
            }
        }
    }
    return patches;
}

Eigen::MatrixXd conv1d(const Eigen::MatrixXd& input, const Eigen::MatrixXd& weights,
                       const Eigen::VectorXd& bias) {
    if (weights.cols() % input.rows() != 0) {
        throw std::invalid_argument("conv1d: weight columns not a multiple of input channels");
    }
    const int kernel = static_cast<int>(weights.cols() / input.rows());
    if (weights.rows() != bias.size()) {
        throw std::invalid_argument("conv1d: bias length mismatch");
    }
    Eigen::MatrixXd out = weights * im2col(input, kernel);
    out.colwise() += bias;
    return out;
}

ConvGrads conv1d_backward(const Eigen::MatrixXd& d_out, const Eigen::MatrixXd& weights,
                          const Eigen::MatrixXd& patches, int input_channels) {
    if (d_out.cols() != patches.cols() || weights.cols() != patches.rows()) {
        throw std::invalid_argument("conv1d_backward: shape mismatch");
    }
    ConvGrads g;
    g.d_weights.noalias() = d_out * patches.transpose();
    g.d_bias = d_out.rowwise().sum();

    const Eigen::Index kernel = patches.rows() / input_channels;
    const Eigen::Index len = d_out.cols();
    const Eigen::Index pad = (kernel - 1) / 2;
    const Eigen::MatrixXd d_patches = weights.transpose() * d_out;
    g.d_input = Eigen::MatrixXd::Zero(input_channels, len);
    for (Eigen::Index c = 0; c < input_channels; ++c) {
        for (Eigen::Index k = 0; k < kernel; ++k) {
            const Eigen::Index shift = k - pad;
            const Eigen::Index t_lo = std::max<Eigen::Index>(0, -shift);
            const Eigen::Index t_hi = std::min(len, len - shift);
            if (t_hi > t_lo) {
                g.d_input.row(c).segment(t_lo + shift, t_hi - t_lo) +=
                    d_patches.row(c * kernel + k).segment(t_lo, t_hi - t_lo);
            }
        }
    }
    return g;
}

Eigen::MatrixXd avg_pool(const Eigen::MatrixXd& input) {
    if (input.cols() < 2) {
        throw std::invalid_argument("avg_pool: input length must be >= 2");
    }
    const Eigen::Index out_len = input.cols() / 2;
    Eigen::MatrixXd out(input.rows(), out_len);
    for (Eigen::Index j = 0; j < out_len; ++j) {
        out.col(j) = 0.5 * (input.col(2 * j) + input.col(2 * j + 1));
    }
    return out;
}

Eigen::MatrixXd avg_pool_backward(const Eigen::MatrixXd& d_out, Eigen::Index input_len) {
    if (input_len / 2 != d_out.cols()) {
        throw std::invalid_argument("avg_pool_backward: length mismatch");
    }
    Eigen::MatrixXd d_in = Eigen::MatrixXd::Zero(d_out.rows(), input_len);
    for (Eigen::Index j = 0; j < d_out.cols(); ++j) {
        d_in.col(2 * j) = 0.5 * d_out.col(j);
        d_in.col(2 * j + 1) = 0.5 * d_out.col(j);
    }
    return d_in;
}

Eigen::MatrixXd relu(const Eigen::MatrixXd& x) {
    return x.cwiseMax(0.0);
}

Eigen::MatrixXd relu_backward(const Eigen::MatrixXd& d_out, const Eigen::MatrixXd& pre_activation) {
    return (pre_activation.array() > 0.0).select(d_out, 0.0);
}

Eigen::MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, core::Engine& rng) {
    if (p >= 1.0 || p < 0.0) {
        throw std::invalid_argument("dropout_mask: p must lie in [0,1)");
    }
    Eigen::MatrixXd mask(rows, cols);
    if (p == 0.0) {
        mask.setOnes();
        return mask;
    }
    const double keep_scale = 1.0 / (1.0 - p);
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) {
            mask(r, c) = core::uniform01(rng) < p ? 0.0 : keep_scale;
        }
    }
    return mask;
}

}  // namespace evrk::pce
