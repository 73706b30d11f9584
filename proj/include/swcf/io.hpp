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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "swcf/geometry.hpp"
#include "swcf/tensor.hpp"

namespace swcf {

/// One LiDAR sweep: rows are (x, y, z, remission).
struct KittiScan {
    Tensor points;
    /// Raw ids: lower 16 bits semantic class, upper 16 bits instance.
    std::optional<std::vector<std::uint32_t>> labels;

    std::size_t size() const { return points.rows(); }
};

inline std::uint16_t semantic_id(std::uint32_t raw) { return static_cast<std::uint16_t>(raw & 0xFFFFu); }
inline std::uint16_t instance_id(std::uint32_t raw) { return static_cast<std::uint16_t>(raw >> 16); }

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

KittiScan parse_scan(std::string_view scan_bytes, std::optional<std::string_view> label_bytes = std::nullopt);
KittiScan read_kitti_scan(const std::filesystem::path& scan_path,
                          const std::optional<std::filesystem::path>& label_path = std::nullopt);

/// Little-endian float32 quadruples. Values are rounded to float32.
std::string encode_scan(const Tensor& points);
std::string encode_labels(std::span<const std::uint32_t> labels);
std::vector<std::uint32_t> decode_labels(std::string_view bytes);
void write_scan(const std::filesystem::path& path, const Tensor& points);
void write_labels(const std::filesystem::path& path, std::span<const std::uint32_t> labels);

/// Raw semantic id → train class, and train class → raw id.
class LabelMap {
  public:
    /// Text format, one entry per line, '#' starts a comment:
    ///   map <raw> <train>|ignore
    ///   inv <train> <raw>
    static LabelMap parse(std::string_view text, std::size_t classes);
    static LabelMap load(const std::filesystem::path& path, std::size_t classes);
    /// raw id c ↔ class c for c < classes.
    static LabelMap identity(std::size_t classes);

    std::size_t classes() const { return classes_; }
    int ignore_label() const { return static_cast<int>(classes_); }
    /// Unknown ids map to the ignore label.
    int to_train(std::uint32_t raw) const;
    std::uint32_t to_raw(int train) const;

    std::vector<int> to_train(std::span<const std::uint32_t> raw) const;
    std::vector<std::uint32_t> to_raw(std::span<const int> train) const;

  private:
    std::size_t classes_ = 0;
    std::vector<std::pair<std::uint16_t, int>> forward_;  // sorted by raw id
    std::vector<std::uint32_t> inverse_;
};

/// Positions plus input features (x, y, z, and remission when
/// `input_channels` is 4); labels remapped when present.
PointCloud to_point_cloud(const KittiScan& scan, const LabelMap& map, std::size_t input_channels = 3);

/// Scan files under `dir` (recursively, sorted) and their label files: a
/// sibling `<stem>.label`, or `../labels/<stem>.label` as in SemanticKITTI.
struct ScanEntry {
    std::filesystem::path scan;
    std::optional<std::filesystem::path> labels;
};
std::vector<ScanEntry> list_scans(const std::filesystem::path& dir);

}  // namespace swcf
