#pragma once

// Fine-tuner model file ("BDT1"), little-endian throughout:
//
//   magic   4 bytes       "BDT1"
//   version u32           1
//   count   u32           number of trees
//   trees   count x tree  each tree is its pre-order node records
//
// One node record is [feature u8][value f64][leaf u8].  value holds the
// threshold for internal nodes (leaf = 0) and the prediction for leaves
// (leaf = 1); internal records are followed by the full left subtree, then
// the full right subtree, which makes the stream self-delimiting.

#include <string>

#include "evrk/bdt/bdt.hpp"

namespace evrk::bdt {

// Throws std::invalid_argument when the model is empty or a tree is
// malformed, std::runtime_error when the file cannot be written.
void save_model(const std::string& path, const BdtModel& model);

// Reconstructs the ensemble; n_features is inferred as one past the highest
// feature index used by any internal node (0 for all-leaf ensembles, meaning
// any arity is accepted).  Throws std::invalid_argument on a missing file,
// bad magic/version, or a truncated or malformed stream.
[[nodiscard]] BdtModel load_model(const std::string& path);

}  // namespace evrk::bdt
