#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace evrk::prep {

/// Identifies one normalizable quantity. TractiveEffort only appears in the
/// 3-channel baseline variant.
enum class Channel : std::uint8_t {
    VehSp = 0,
    RoadEl = 1,
    VehAcc = 2,
    AuxLd = 3,
    WindSp = 4,
    EnvTemp = 5,
    BattSoc = 6,
    ActPow = 7,
    TractiveEffort = 8,
};

const char* channel_name(Channel c);

/// Min-max bounds for one channel, recorded from training data only.
struct ChannelBounds {
    Channel channel = Channel::VehSp;
    double min = 0.0;
    double max = 0.0;

    bool degenerate() const noexcept { return max == min; }
};

/// Per-channel normalization bounds. Serialized with the model so inference
/// applies exactly the training-time mapping.
class NormalizationParams {
public:
    NormalizationParams() = default;

    void set(Channel c, double min, double max);
    const ChannelBounds& at(Channel c) const;
    bool has(Channel c) const noexcept;
    const std::vector<ChannelBounds>& entries() const noexcept { return entries_; }

private:
    std::vector<ChannelBounds> entries_;
};

struct NormalizedSeq {
    Eigen::VectorXd values;   // in [0,1] for in-range inputs
    bool degenerate = false;  // max == min convention: all zeros
};

/// Maps z elementwise to (z - min)/(max - min). A degenerate channel
/// (max == min) maps everything to 0 and flags the result.
NormalizedSeq normalize(const Eigen::VectorXd& z, const ChannelBounds& b);
double normalize_scalar(double z, const ChannelBounds& b);

/// Inverse of normalize on non-degenerate channels; returns min on
/// degenerate ones.
Eigen::VectorXd denormalize(const Eigen::VectorXd& zn, const ChannelBounds& b);
double denormalize_scalar(double zn, const ChannelBounds& b);

}  // namespace evrk::prep
