#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "network.hpp"
#include "trainer.hpp"

namespace shark::train {

inline constexpr uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
  int64_t epoch = 0;  // completed epochs
  int64_t step = 0;   // completed optimizer steps
  uint64_t seed = 0;
  uint64_t rng_state = 0;
  uint64_t rng_inc = 0;
};

struct LoadedCheckpoint {
  net::ModelConfig config;
  CheckpointMeta meta;
  net::Model model;
  AdamParams adam_hyper;
  int64_t adam_t = 0;
  std::vector<Tensor> adam_m, adam_v;  // parameter order
};

/// Binary format, little-endian: magic, format version, model config and
/// counters, a length-prefixed parameter name table with shapes, the float32
/// parameter/moment arrays, and a trailing CRC-32 of everything before it.
/// The write is atomic (temp file + rename).
void save_checkpoint(const std::string& path, const net::Model& model, const Adam& adam,
                     const CheckpointMeta& meta);
/// Verifies checksum and version, rebuilds the model from the stored config,
/// and checks the name table against it.
LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace shark::train
