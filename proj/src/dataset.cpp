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


#include "swcf/dataset.hpp"

#include <cstdio>

#include "swcf/error.hpp"

#ifndef SWCF_DATA_DIR
#define SWCF_DATA_DIR "data"
#endif

namespace swcf {

SceneSpec scene_spec(const RunConfig& cfg) {
    SceneSpec spec;
    if (cfg.scene == "default")
        spec = SceneSpec::default_spec();
    else if (cfg.scene == "context")
        spec = SceneSpec::semantic_context();
    else if (cfg.scene == "plane")
        spec = SceneSpec::single_plane();
    else
        throw ConfigError("scene: '" + cfg.scene + "' is not one of default, context, plane");
    spec.points = cfg.scene_points;
    if (spec.classes.size() != cfg.net.num_classes)
        throw ConfigError("scene '" + cfg.scene + "' has " + std::to_string(spec.classes.size()) +
                          " classes but num_classes is " + std::to_string(cfg.net.num_classes));
    return spec;
}

LabelMap label_map_for(const RunConfig& cfg) {
    if (cfg.label_map.empty()) return LabelMap::identity(cfg.net.num_classes);
    if (cfg.label_map == "kitti")
        return LabelMap::load(std::filesystem::path(SWCF_DATA_DIR) / "kitti_label_map.txt", cfg.net.num_classes);
    return LabelMap::load(cfg.label_map, cfg.net.num_classes);
}

namespace {

std::string scene_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "scene_%04zu", i);
    return buf;
}

}  // namespace

Dataset synthetic_dataset(const RunConfig& cfg) {
    const SceneSpec spec = scene_spec(cfg);
    const RngState base(cfg.data_seed);
    Dataset ds;
    for (std::size_t i = 0; i < cfg.scenes; ++i) {
        RngState rng = base.fork(i);
        ds.names.push_back(scene_name(i));
        ds.clouds.push_back(synth_scene(rng, spec));
    }
    return ds;
}

Dataset load_dataset(const RunConfig& cfg) {
    if (cfg.data_dir.empty()) return synthetic_dataset(cfg);
    const LabelMap map = label_map_for(cfg);
    Dataset ds;
    for (const auto& entry : list_scans(cfg.data_dir)) {
        const KittiScan scan = read_kitti_scan(entry.scan, entry.labels);
        ds.names.push_back(entry.scan.stem().string());
        ds.clouds.push_back(to_point_cloud(scan, map, cfg.net.input_channels));
    }
    if (ds.clouds.empty()) throw DataError("no .bin scans under " + cfg.data_dir);
    return ds;
}

std::vector<std::string> write_synthetic(const RunConfig& cfg, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const Dataset ds = synthetic_dataset(cfg);
    const LabelMap map = LabelMap::identity(cfg.net.num_classes);
    std::vector<std::string> written;
    for (std::size_t i = 0; i < ds.clouds.size(); ++i) {
        const PointCloud& c = ds.clouds[i];
        Tensor pts(Shape{c.size(), 4});
        for (std::size_t r = 0; r < c.size(); ++r)
            for (std::size_t a = 0; a < 3; ++a) pts.at(r, a) = c.positions.at(r, a);
        const auto bin = dir / (ds.names[i] + ".bin");
        write_scan(bin, pts);
        write_labels(dir / (ds.names[i] + ".label"), map.to_raw(*c.labels));
        written.push_back(bin.string());
    }
    return written;
}

}  // namespace swcf
