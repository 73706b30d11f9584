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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "swcf/network.hpp"
#include "swcf/training.hpp"

namespace swcf {

/// Everything a CLI run needs. Keys are flat: every NetworkConfig and
/// TrainConfig field plus the data and output settings below.
struct RunConfig {
    /// "production" or "desk": selects the defaults the other keys override.
    std::string preset = "production";
    NetworkConfig net;
    TrainConfig train;

    /// Directory of .bin/.label scans; empty means synthetic scenes.
    std::string data_dir;
    /// Label map file for scans; empty means identity ids (synthetic data).
    std::string label_map;
    std::string scene = "default";  // default | context | plane
    std::size_t scenes = 4;
    std::size_t scene_points = 2048;
    std::uint64_t data_seed = 1;

    std::string checkpoint = "swcf.ckpt";
    std::string metrics = "metrics.csv";
    bool exclude_absent = true;

    static RunConfig from_preset(const std::string& preset);
};

nlohmann::json to_json(const RunConfig& cfg);
/// All accepted keys, in file order.
std::vector<std::string> config_keys();
/// Sets one key; throws ConfigError for unknown keys or ill-typed values.
void set_key(RunConfig& cfg, const std::string& key, const nlohmann::json& value);
/// A CLI string as a config value: JSON when it parses, a comma list of
/// numbers when it looks like one, otherwise a plain string.
nlohmann::json parse_cli_value(const std::string& text);

/// default (of the chosen preset) < file < CLI overrides.
RunConfig resolve_config(const std::optional<nlohmann::json>& file,
                         const std::vector<std::pair<std::string, std::string>>& cli);
nlohmann::json load_config_file(const std::filesystem::path& path);

nlohmann::json network_to_json(const NetworkConfig& cfg);
/// Strict: every key must be known; missing keys keep their defaults.
NetworkConfig network_from_json(const nlohmann::json& j);

}  // namespace swcf
