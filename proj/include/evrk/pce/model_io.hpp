// Portable binary model file.
//
// Layout (all integers little-endian):
//   magic "PCE1" | version u32 = 1
//   arch: blocks i32, input_len i32, kernel_sizes i32[3], channel_plan i32[3],
//         hidden i32, outputs i32, append_scalars u8, dropout_p f64
//   normalization: entry count u32, then per entry channel u8, min f64, max f64
//   parameters: count u64, then count f64 values in ParamLayout order
// Doubles are IEEE-754 bit patterns, little-endian, so save → load is
// bit-exact.
#pragma once

#include <string>

#include "evrk/pce/model.hpp"

namespace evrk::pce {

void save_model(const std::string& path, const CnnModel& model);

// Throws std::invalid_argument on bad magic, version, or a truncated file.
[[nodiscard]] CnnModel load_model(const std::string& path);

}  // namespace evrk::pce
