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

#include <string>
#include <vector>

#include "swcf/config.hpp"
#include "swcf/io.hpp"
#include "swcf/synth.hpp"

namespace swcf {

/// Scene recipe named by `cfg.scene` with `cfg.scene_points` points. Its
/// class count must equal `cfg.net.num_classes`.
SceneSpec scene_spec(const RunConfig& cfg);

/// "" → identity ids, "kitti" → the bundled SemanticKITTI table, else a path.
LabelMap label_map_for(const RunConfig& cfg);

struct Dataset {
    std::vector<std::string> names;
    std::vector<PointCloud> clouds;
};

/// Scene i of a synthetic set is drawn from RngState(data_seed).fork(i).
Dataset synthetic_dataset(const RunConfig& cfg);
/// Scans under `cfg.data_dir`, or the synthetic set when it is empty.
Dataset load_dataset(const RunConfig& cfg);

/// Writes scene_NNNN.bin / scene_NNNN.label (remission 0, identity ids).
std::vector<std::string> write_synthetic(const RunConfig& cfg, const std::filesystem::path& dir);

}  // namespace swcf
