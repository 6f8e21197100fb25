#include "evrk/pce/arch.hpp"

#include <stdexcept>

namespace evrk::pce {

void ArchDescriptor::validate() const {
    if (blocks < 1) throw std::invalid_argument("ArchDescriptor: blocks must be >= 1");
    if (input_len < 8) throw std::invalid_argument("ArchDescriptor: input_len must be >= 8");
    for (int k : kernel_sizes) {
        if (k < 1 || k % 2 == 0) {
            throw std::invalid_argument("ArchDescriptor: kernel sizes must be odd and positive");
        }
    }
    for (int c : channel_plan) {
        if (c < 1) throw std::invalid_argument("ArchDescriptor: channel plan must be positive");
    }
    if (hidden < 1) throw std::invalid_argument("ArchDescriptor: hidden width must be >= 1");
    if (outputs < 1) throw std::invalid_argument("ArchDescriptor: outputs must be >= 1");
    if (!(dropout_p >= 0.0 && dropout_p < 1.0)) {
        throw std::invalid_argument("ArchDescriptor: dropout_p must lie in [0,1)");
    }
}

std::array<std::int32_t, 4> ArchDescriptor::branch_lengths() const {
    std::array<std::int32_t, 4> l{};
    l[0] = input_len;
    for (int i = 1; i < 4; ++i) l[i] = l[i - 1] / 2;
    return l;
}

const ParamLayout::Piece& ParamLayout::conv_w(int block, int branch, int stage) const {
    return conv_w_[static_cast<std::size_t>((block * branches_per_block_ + branch) * 3 + stage)];
}

const ParamLayout::Piece& ParamLayout::conv_b(int block, int branch, int stage) const {
    return conv_b_[static_cast<std::size_t>((block * branches_per_block_ + branch) * 3 + stage)];
}

ParamLayout ParamLayout::from(const ArchDescriptor& arch) {
    arch.validate();
    ParamLayout layout;
    std::int64_t off = 0;
    auto push = [&](std::vector<Piece>& dst, std::int32_t rows, std::int32_t cols) -> Piece& {
        Piece p{off, rows, cols};
        off += p.count();
        dst.push_back(p);
        layout.pieces_.push_back(p);
        return dst.back();
    };
    for (int b = 0; b < arch.blocks; ++b) {
        for (int j = 0; j < 3; ++j) {
            const std::int32_t k = arch.kernel_sizes[static_cast<std::size_t>(j)];
            std::int32_t c_in = 1;
            for (int s = 0; s < 3; ++s) {
                const std::int32_t c_out = arch.channel_plan[static_cast<std::size_t>(s)];
                push(layout.conv_w_, c_out, c_in * k);
                push(layout.conv_b_, c_out, 1);
                c_in = c_out;
            }
        }
    }
    Piece fc1w{off, arch.hidden, arch.fc_in()};
    off += fc1w.count();
    layout.pieces_.push_back(fc1w);
    Piece fc1b{off, arch.hidden, 1};
    off += fc1b.count();
    layout.pieces_.push_back(fc1b);
    Piece fc2w{off, arch.outputs, arch.hidden};
    off += fc2w.count();
    layout.pieces_.push_back(fc2w);
    Piece fc2b{off, arch.outputs, 1};
    off += fc2b.count();
    layout.pieces_.push_back(fc2b);
    layout.fc1_w_ = fc1w;
    layout.fc1_b_ = fc1b;
    layout.fc2_w_ = fc2w;
    layout.fc2_b_ = fc2b;
    layout.total_ = off;
    return layout;
}

ShapeLedger shape_ledger(const ArchDescriptor& arch) {
    arch.validate();
    ShapeLedger s{};
    s.branch_lengths = arch.branch_lengths();
    s.block_channels = arch.block_channels();
    s.block_out_len = arch.branch_out_len();
    s.flatten_len = arch.flatten_len();
    s.fc_in = arch.fc_in();
    s.hidden = arch.hidden;
    s.outputs = arch.outputs;
    return s;
}

}  // namespace evrk::pce
