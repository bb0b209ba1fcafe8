// Copyright 2026 The ExtEd Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Binary checkpoint format, all integers and doubles little-endian:
//
//   "XED1"                      4-byte magic
//   u32  version                 = 1
//   u64  header length, then that many bytes of JSON:
//          {"config": ModelConfig, "vocab": [tokens after the reserved 4],
//           "adam": {lr, beta1, beta2, eps}, "epochs_completed": n}
//   u32  tensor count            = 11
//   u64 rows, u64 cols           per tensor
//   f64  parameters              tensors in ExtEdParams::for_each order
//   f64  Adam first moments      same order
//   f64  Adam second moments     same order
//   u64  step count
//   u64  rng seed, u64 state length, state bytes (mt19937_64 text form)
//
// The file must end exactly after the rng state.

#ifndef EXTED_CHECKPOINT_HPP_
#define EXTED_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "exted/model.hpp"
#include "exted/rng.hpp"
#include "exted/vocab.hpp"

namespace exted {

inline constexpr char kCheckpointMagic[4] = {'X', 'E', 'D', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelConfig config;
  Vocabulary vocab;
  AdamHyper adam;
  ExtEdParams params;
  AdamState opt;  // opt.step is the training step count
  std::uint64_t epochs_completed = 0;
  Rng rng;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

nlohmann::json model_config_to_json(const ModelConfig& cfg);
// Throws InputError for unknown keys or invalid values; missing keys keep
// their defaults.
ModelConfig model_config_from_json(const nlohmann::json& j);

std::string serialize_checkpoint(const Checkpoint& ckpt);
// Throws FormatError (with byte offset) for bad magic, version, shapes or
// truncation.
Checkpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);
// Also throws DimensionError when the stored dimensions differ from
// `expected` (V, E, H, D_ec and mode).
Checkpoint load_checkpoint(const std::filesystem::path& path, const ModelConfig& expected);

}  // namespace exted

#endif  // EXTED_CHECKPOINT_HPP_
