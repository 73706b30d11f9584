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


#include "swcf/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "swcf/error.hpp"

namespace swcf {

static_assert(std::endian::native == std::endian::little, "scan I/O assumes a little-endian host");

namespace {

constexpr std::size_t kPointBytes = 16;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

std::uint64_t parse_uint(std::string_view s, std::size_t line) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw FormatError("label map line " + std::to_string(line) + ": bad integer '" + std::string(s) + "'");
    return v;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failed: " + path.string());
    return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

KittiScan parse_scan(std::string_view scan_bytes, std::optional<std::string_view> label_bytes) {
    if (scan_bytes.size() % kPointBytes != 0)
        throw FormatError("scan size " + std::to_string(scan_bytes.size()) + " is not a multiple of 16 bytes");
    const std::size_t n = scan_bytes.size() / kPointBytes;
    KittiScan scan;
    scan.points = Tensor(Shape{n, 4});
    auto dst = scan.points.data();
    for (std::size_t i = 0; i < 4 * n; ++i) {
        float f;
        std::memcpy(&f, scan_bytes.data() + 4 * i, 4);
        dst[i] = f;
    }
    if (label_bytes) {
        auto labels = decode_labels(*label_bytes);
        if (labels.size() != n)
            throw FormatError("label count " + std::to_string(labels.size()) + " != point count " + std::to_string(n));
        scan.labels = std::move(labels);
    }
    return scan;
}

KittiScan read_kitti_scan(const std::filesystem::path& scan_path, const std::optional<std::filesystem::path>& label_path) {
    const std::string bytes = read_file(scan_path);
    if (!label_path) return parse_scan(bytes);
    const std::string labels = read_file(*label_path);
    return parse_scan(bytes, std::string_view(labels));
}

std::string encode_scan(const Tensor& points) {
    if (points.rank() != 2 || points.cols() != 4)
        throw DimensionError("scan points must be N×4, got " + shape_str(points.shape()));
    std::string out(points.size() * 4, '\0');
    auto src = points.data();
    for (std::size_t i = 0; i < src.size(); ++i) {
        const float f = static_cast<float>(src[i]);
        std::memcpy(out.data() + 4 * i, &f, 4);
    }
    return out;
}

std::string encode_labels(std::span<const std::uint32_t> labels) {
    std::string out(labels.size() * 4, '\0');
    if (!labels.empty()) std::memcpy(out.data(), labels.data(), out.size());
    return out;
}

std::vector<std::uint32_t> decode_labels(std::string_view bytes) {
    if (bytes.size() % 4 != 0)
        throw FormatError("label size " + std::to_string(bytes.size()) + " is not a multiple of 4 bytes");
    std::vector<std::uint32_t> out(bytes.size() / 4);
    if (!out.empty()) std::memcpy(out.data(), bytes.data(), bytes.size());
    return out;
}

void write_scan(const std::filesystem::path& path, const Tensor& points) { write_file(path, encode_scan(points)); }

void write_labels(const std::filesystem::path& path, std::span<const std::uint32_t> labels) {
    write_file(path, encode_labels(labels));
}

LabelMap LabelMap::parse(std::string_view text, std::size_t classes) {
    if (classes == 0) throw ConfigError("label map needs at least one class");
    LabelMap m;
    m.classes_ = classes;
    m.inverse_.assign(classes, 0);
    std::vector<bool> has_inverse(classes, false);
    std::size_t line_no = 0;
    while (!text.empty()) {
        const std::size_t nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto tok = split_ws(line);
        if (tok.size() != 3) throw FormatError("label map line " + std::to_string(line_no) + ": expected 3 fields");
        if (tok[0] == "map") {
            const std::uint64_t raw = parse_uint(tok[1], line_no);
            if (raw > 0xFFFF) throw FormatError("label map line " + std::to_string(line_no) + ": raw id above 65535");
            int train = m.ignore_label();
            if (tok[2] != "ignore") {
                const std::uint64_t t = parse_uint(tok[2], line_no);
                if (t >= classes)
                    throw FormatError("label map line " + std::to_string(line_no) + ": class " + std::to_string(t) +
                                      " out of range");
                train = static_cast<int>(t);
            }
            m.forward_.emplace_back(static_cast<std::uint16_t>(raw), train);
        } else if (tok[0] == "inv") {
            const std::uint64_t t = parse_uint(tok[1], line_no);
            if (t >= classes)
                throw FormatError("label map line " + std::to_string(line_no) + ": class out of range");
            m.inverse_[t] = static_cast<std::uint32_t>(parse_uint(tok[2], line_no));
            has_inverse[t] = true;
        } else {
            throw FormatError("label map line " + std::to_string(line_no) + ": unknown directive '" +
                              std::string(tok[0]) + "'");
        }
    }
    std::sort(m.forward_.begin(), m.forward_.end());
    for (std::size_t i = 1; i < m.forward_.size(); ++i)
        if (m.forward_[i].first == m.forward_[i - 1].first)
            throw FormatError("label map: raw id " + std::to_string(m.forward_[i].first) + " mapped twice");
    for (std::size_t c = 0; c < classes; ++c)
        if (!has_inverse[c]) throw FormatError("label map: no inverse entry for class " + std::to_string(c));
    return m;
}

LabelMap LabelMap::load(const std::filesystem::path& path, std::size_t classes) {
    return parse(read_file(path), classes);
}

LabelMap LabelMap::identity(std::size_t classes) {
    LabelMap m;
    m.classes_ = classes;
    for (std::size_t c = 0; c < classes; ++c) {
        m.forward_.emplace_back(static_cast<std::uint16_t>(c), static_cast<int>(c));
        m.inverse_.push_back(static_cast<std::uint32_t>(c));
    }
    return m;
}

int LabelMap::to_train(std::uint32_t raw) const {
    const std::uint16_t id = semantic_id(raw);
    auto it = std::lower_bound(forward_.begin(), forward_.end(), std::make_pair(id, std::numeric_limits<int>::min()));
    if (it == forward_.end() || it->first != id) return ignore_label();
    return it->second;
}

std::uint32_t LabelMap::to_raw(int train) const {
    if (train < 0 || static_cast<std::size_t>(train) >= classes_)
        throw IndexError("class " + std::to_string(train) + " outside [0, " + std::to_string(classes_) + ")");
    return inverse_[static_cast<std::size_t>(train)];
}

std::vector<int> LabelMap::to_train(std::span<const std::uint32_t> raw) const {
    std::vector<int> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = to_train(raw[i]);
    return out;
}

std::vector<std::uint32_t> LabelMap::to_raw(std::span<const int> train) const {
    std::vector<std::uint32_t> out(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) out[i] = to_raw(train[i]);
    return out;
}

PointCloud to_point_cloud(const KittiScan& scan, const LabelMap& map, std::size_t input_channels) {
    if (input_channels != 3 && input_channels != 4)
        throw ConfigError("scan input channels must be 3 or 4, got " + std::to_string(input_channels));
    const std::size_t n = scan.size();
    PointCloud cloud;
    cloud.positions = Tensor(Shape{n, 3});
    cloud.features = Tensor(Shape{n, input_channels});
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a < 3; ++a) cloud.positions.at(i, a) = scan.points.at(i, a);
        for (std::size_t a = 0; a < input_channels; ++a) cloud.features->at(i, a) = scan.points.at(i, a);
    }
    if (scan.labels) cloud.labels = map.to_train(*scan.labels);
    return cloud;
}

std::vector<ScanEntry> list_scans(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    std::vector<fs::path> scans;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".bin") scans.push_back(e.path());
    std::sort(scans.begin(), scans.end());
    std::vector<ScanEntry> out;
    for (const auto& s : scans) {
        ScanEntry entry{s, std::nullopt};
        const fs::path sibling = fs::path(s).replace_extension(".label");
        const fs::path kitti = s.parent_path().parent_path() / "labels" / s.filename().replace_extension(".label");
        if (fs::is_regular_file(sibling))
            entry.labels = sibling;
        else if (fs::is_regular_file(kitti))
            entry.labels = kitti;
        out.push_back(std::move(entry));
    }
    return out;
}

}  // namespace swcf
