// Network geometry and flat-parameter layout.
//
// Each input channel feeds one feature-extraction block: three convolutional
// branches (kernel sizes 3/5/7, channel plan conv8 → conv4 → conv4, ReLU
// after every conv, dropout after the last, average pool window 2 stride 2
// after every stage) plus one parameter-free residual branch of three pools.
// With 100-sample inputs each branch ends at 4×12 and the residual at 1×12,
// so a block emits 13 channels × 12 steps = 156 features; five blocks flatten
// to 780, the two normalized scalars extend that to 782, and two fully
// connected layers (ReLU between, linear output) produce the 10 per-second
// estimates.
//
// All learnable parameters live in one flat vector whose traversal order is
// fixed by ParamLayout (and by the model file):
//   for each block: for each branch (kernel 3, 5, 7):
//     conv1 W[8 × 1·K], conv1 b[8], conv2 W[4 × 8·K], conv2 b[4],
//     conv3 W[4 × 4·K], conv3 b[4]
//   fc1 W[H × fc_in], fc1 b[H], fc2 W[out × H], fc2 b[out]
// Weight matrices are row-major within the flat vector: W(r, c) sits at
// offset + r·cols + c.
#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace evrk::pce {

struct ArchDescriptor {
    std::int32_t blocks = 5;
    std::int32_t input_len = 100;
    std::array<std::int32_t, 3> kernel_sizes = {3, 5, 7};
    std::array<std::int32_t, 3> channel_plan = {8, 4, 4};
    std::int32_t hidden = 128;
    std::int32_t outputs = 10;
    bool append_scalars = true;
    double dropout_p = 0.2;

    // Throws std::invalid_argument on malformed geometry (even kernels,
    // non-positive sizes, dropout outside [0,1), input too short to pool).
    void validate() const;

    [[nodiscard]] std::array<std::int32_t, 4> branch_lengths() const;  // L0..L3
    [[nodiscard]] std::int32_t branch_out_len() const { return branch_lengths()[3]; }
    [[nodiscard]] std::int32_t block_channels() const { return 3 * channel_plan[2] + 1; }
    [[nodiscard]] std::int32_t block_features() const { return block_channels() * branch_out_len(); }
    [[nodiscard]] std::int32_t flatten_len() const { return blocks * block_features(); }
    [[nodiscard]] std::int32_t fc_in() const { return flatten_len() + (append_scalars ? 2 : 0); }

    [[nodiscard]] bool operator==(const ArchDescriptor&) const = default;
};

// Offsets of every parameter tensor inside the flat vector.
struct ParamLayout {
    struct Piece {
        std::int64_t offset = 0;
        std::int32_t rows = 0;  // output channels / units
        std::int32_t cols = 0;  // input size (1 for biases)
        [[nodiscard]] std::int64_t count() const { return std::int64_t{rows} * cols; }
    };

    // stage is 0..2 within a branch.
    [[nodiscard]] const Piece& conv_w(int block, int branch, int stage) const;
    [[nodiscard]] const Piece& conv_b(int block, int branch, int stage) const;
    [[nodiscard]] const Piece& fc1_w() const { return fc1_w_; }
    [[nodiscard]] const Piece& fc1_b() const { return fc1_b_; }
    [[nodiscard]] const Piece& fc2_w() const { return fc2_w_; }
    [[nodiscard]] const Piece& fc2_b() const { return fc2_b_; }
    [[nodiscard]] std::int64_t total() const { return total_; }

    // Pieces in traversal order (weights and biases interleaved), for
    // initialization and serialization.
    [[nodiscard]] const std::vector<Piece>& pieces() const { return pieces_; }

    [[nodiscard]] static ParamLayout from(const ArchDescriptor& arch);

private:
    std::vector<Piece> conv_w_, conv_b_;  // indexed (block*3 + branch)*3 + stage
    Piece fc1_w_, fc1_b_, fc2_w_, fc2_b_;
    std::vector<Piece> pieces_;
    std::int64_t total_ = 0;
    std::int32_t branches_per_block_ = 3;
};

// Intermediate tensor shapes of one forward pass, for exact assertions.
struct ShapeLedger {
    std::array<std::int32_t, 4> branch_lengths;  // 100→50→25→12 at defaults
    std::int32_t block_channels;                  // 13
    std::int32_t block_out_len;                   // 12
    std::int32_t flatten_len;                     // 780
    std::int32_t fc_in;                           // 782
    std::int32_t hidden;
    std::int32_t outputs;                         // 10
};

[[nodiscard]] ShapeLedger shape_ledger(const ArchDescriptor& arch);

}  // namespace evrk::pce
