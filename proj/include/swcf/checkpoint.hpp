// Copyright 2026 The SWCF-Net Authors
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


#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "swcf/network.hpp"
#include "swcf/tensor.hpp"

namespace swcf {

inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class DType : std::uint8_t { kF64 = 0, kF32 = 1 };

struct NamedTensor {
    std::string name;
    Tensor value;
};

/// Layout (little-endian):
///   "SWCFCKPT" u32 version u64 fnv1a(config) u64 |config| config
///   u32 count, then per tensor: u32 |name| name u32 rank u64 dims[rank]
///   u8 dtype, raw values.
struct Checkpoint {
    std::uint32_t version = kCheckpointVersion;
    /// Network config as JSON text; its digest is stored in the header.
    std::string config;
    std::vector<NamedTensor> tensors;
};

std::uint64_t fnv1a64(std::string_view bytes);

std::string encode_checkpoint(const Checkpoint& ckpt, DType dtype = DType::kF64);
/// Throws FormatError on bad magic, unknown version, digest mismatch,
/// truncation or trailing bytes.
Checkpoint decode_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt, DType dtype = DType::kF64);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Parameters of `model` in visiting order, with the config embedded.
Checkpoint snapshot(const ModelState& model, const NetworkConfig& cfg);
/// Copies tensors into `model` by name. Missing, extra or misshaped
/// tensors are a FormatError.
void restore(ModelState& model, const Checkpoint& ckpt);

struct LoadedModel {
    NetworkConfig config;
    ModelState model;
};
LoadedModel load_model(const std::filesystem::path& path);

}  // namespace swcf
