#include "evrk/prep/normalize.hpp"

#include <cmath>
#include <stdexcept>

namespace evrk::prep {

const char* channel_name(Channel c) {
    switch (c) {
        case Channel::VehSp: return "veh_sp";
        case Channel::RoadEl: return "road_el";
        case Channel::VehAcc: return "veh_acc";
        case Channel::AuxLd: return "aux_ld";
        case Channel::WindSp: return "wind_sp";
        case Channel::EnvTemp: return "env_temp";
        case Channel::BattSoc: return "batt_soc";
        case Channel::ActPow: return "act_pow";
        case Channel::TractiveEffort: return "t_eff";
    }
    return "?";
}

void NormalizationParams::set(Channel channel, double min, double max) {
    if (!std::isfinite(min) || !std::isfinite(max)) {
        throw std::invalid_argument("NormalizationParams: non-finite bound");
    }
    if (max < min) {
        throw std::invalid_argument("NormalizationParams: max < min");
    }
    for (auto& e : entries_) {
        if (e.channel == channel) {
            e.min = min;
            e.max = max;
            return;
        }
    }
    entries_.push_back({channel, min, max});
}

const ChannelBounds& NormalizationParams::at(Channel channel) const {
    for (const auto& e : entries_) {
        if (e.channel == channel) return e;
    }
    throw std::invalid_argument(std::string("NormalizationParams: no bounds for ") +
                                channel_name(channel));
}

bool NormalizationParams::has(Channel channel) const noexcept {
    for (const auto& e : entries_) {
        if (e.channel == channel) return true;
    }
    return false;
}

NormalizedSeq normalize(const Eigen::VectorXd& z, const ChannelBounds& b) {
    NormalizedSeq out;
    out.values.resize(z.size());
    if (b.degenerate()) {
        out.values.setZero();
        out.degenerate = true;
        return out;
    }
    const double span = b.max - b.min;
    out.values = (z.array() - b.min) / span;
    return out;
}

double normalize_scalar(double z, const ChannelBounds& b) {
    if (b.degenerate()) return 0.0;
    return (z - b.min) / (b.max - b.min);
}

Eigen::VectorXd denormalize(const Eigen::VectorXd& zn, const ChannelBounds& b) {
    return (zn.array() * (b.max - b.min) + b.min).matrix();
}

double denormalize_scalar(double zn, const ChannelBounds& b) {
    return zn * (b.max - b.min) + b.min;
}

}  // namespace evrk::prep
