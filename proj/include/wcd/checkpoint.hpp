/*
 * Copyright 2026 TransWCD-CPP Contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef WCD_CHECKPOINT_HPP_
#define WCD_CHECKPOINT_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "wcd/tensor.hpp"

namespace wcd {

/// Single-file container: 8-byte magic "WCDCKPT1", little-endian u32 format
/// version, u64 JSON length, JSON metadata (iteration, seed, resolved config
/// text, array directory, optimizer scalars), then every array back to back
/// as little-endian IEEE-754 float64 in directory order (parameters first,
/// then per-slot optimizer moments m,v). Full layout: docs/checkpoint.md.
/// RNG state needs no extra blob: every stream is re-derived from (seed,
/// purpose, indices), so seed + iteration reconstruct it exactly.
struct CheckpointData {
  i64 iteration = 0;
  std::uint64_t seed = 0;
  std::string config_ini;

  std::vector<std::pair<std::string, Tensor>> params;  // creation order

  struct SlotState {
    std::string name;
    std::string group;  // "backbone" | "head"
    bool decay = true;
    i64 gate_start = 0;
    i64 t = 0;
    Tensor m, v;
  };
  bool has_optimizer = false;
  double weight_decay = 0.0, beta1 = 0.0, beta2 = 0.0, eps = 0.0;
  std::vector<SlotState> slots;
};

void save_checkpoint(const std::string& path, const CheckpointData& data);

/// Errors with wcd::Error on missing file, bad magic, unsupported version,
/// truncation, or metadata/blob size mismatch.
CheckpointData load_checkpoint(const std::string& path);

}  // namespace wcd

#endif  // WCD_CHECKPOINT_HPP_
