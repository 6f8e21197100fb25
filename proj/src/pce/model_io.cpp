#include "evrk/pce/model_io.hpp"

#include <cstring>
#include <fstream>

#include "evrk/core/binio.hpp"

namespace evrk::pce {

namespace {

constexpr char kMagic[4] = {'P', 'C', 'E', '1'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void save_model(const std::string& path, const CnnModel& model) {
    model.arch.validate();
    const ParamLayout layout = model.layout();
    if (model.params.size() != layout.total()) {
        throw std::invalid_argument("save_model: parameter vector size mismatch");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::invalid_argument("save_model: cannot open '" + path + "'");
    }
    out.write(kMagic, 4);
    core::write_u32(out, kVersion);
    core::write_i32(out, model.arch.blocks);
    core::write_i32(out, model.arch.input_len);
    for (std::int32_t k : model.arch.kernel_sizes) core::write_i32(out, k);
    for (std::int32_t c : model.arch.channel_plan) core::write_i32(out, c);
    core::write_i32(out, model.arch.hidden);
    core::write_i32(out, model.arch.outputs);
    core::write_u8(out, model.arch.append_scalars ? 1 : 0);
    core::write_f64(out, model.arch.dropout_p);

    const auto& entries = model.norm.entries();
    core::write_u32(out, static_cast<std::uint32_t>(entries.size()));
    for (const auto& e : entries) {
        core::write_u8(out, static_cast<std::uint8_t>(e.channel));
        core::write_f64(out, e.min);
        core::write_f64(out, e.max);
    }

    core::write_u64(out, static_cast<std::uint64_t>(model.params.size()));
    for (Eigen::Index i = 0; i < model.params.size(); ++i) {
        core::write_f64(out, model.params[i]);
    }
    if (!out) {
        throw std::invalid_argument("save_model: write failed for '" + path + "'");
    }
}

CnnModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::invalid_argument("load_model: cannot open '" + path + "'");
    }
    char magic[4];
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0) {
        throw std::invalid_argument("load_model: bad magic in '" + path + "'");
    }
    if (core::read_u32(in) != kVersion) {
        throw std::invalid_argument("load_model: unsupported version");
    }
    CnnModel model;
    model.arch.blocks = core::read_i32(in);
    model.arch.input_len = core::read_i32(in);
    for (auto& k : model.arch.kernel_sizes) k = core::read_i32(in);
    for (auto& c : model.arch.channel_plan) c = core::read_i32(in);
    model.arch.hidden = core::read_i32(in);
    model.arch.outputs = core::read_i32(in);
    model.arch.append_scalars = core::read_u8(in) != 0;
    model.arch.dropout_p = core::read_f64(in);
    model.arch.validate();

    const std::uint32_t norm_count = core::read_u32(in);
    for (std::uint32_t i = 0; i < norm_count; ++i) {
        const auto channel = static_cast<prep::Channel>(core::read_u8(in));
        const double lo = core::read_f64(in);
        const double hi = core::read_f64(in);
        model.norm.set(channel, lo, hi);
    }

    const std::uint64_t count = core::read_u64(in);
    const ParamLayout layout = model.layout();
    if (count != static_cast<std::uint64_t>(layout.total())) {
        throw std::invalid_argument("load_model: parameter count does not match architecture");
    }
    model.params.resize(static_cast<Eigen::Index>(count));
    for (std::uint64_t i = 0; i < count; ++i) {
        model.params[static_cast<Eigen::Index>(i)] = core::read_f64(in);
    }
    return model;
}

}  // namespace evrk::pce
