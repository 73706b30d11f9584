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

#include <cstddef>
#include <string>
#include <vector>

#include "swcf/geometry.hpp"
#include "swcf/rng.hpp"

namespace swcf {

enum class ShapeKind {
    kPlane,           ///< flat ground
    kBox,             ///< building walls and roof
    kCylinder,        ///< tree trunks
    kClusterNearBox,  ///< pedestrian-sized blobs standing next to a building
    kClusterFarFromBox,  ///< the same blobs, placed away from every building
};

struct ClassLayout {
    std::string name;
    ShapeKind kind = ShapeKind::kPlane;
    double proportion = 1.0;
};

/// Recipe for a labelled synthetic outdoor scene. Class c of the output is
/// `classes[c]`; point counts per class are round(points · proportion), the
/// rounding remainder going to class 0.
struct SceneSpec {
    std::vector<ClassLayout> classes;
    std::size_t points = 2048;
    double half_extent = 15.0;  // ground is [-e, e]² meters
    std::size_t boxes = 3;
    std::size_t cylinders = 4;
    std::size_t clusters = 4;
    double near_gap = 1.0;      // cluster center to building face
    double far_gap = 6.0;       // minimum cluster distance to any building
    double noise = 0.02;

    /// ground, building, trunk, pedestrian (pedestrians beside buildings).
    static SceneSpec default_spec();
    /// ground, building, near-cluster, far-cluster: the last two are
    /// locally identical and differ only in distance to the nearest building.
    static SceneSpec semantic_context();
    static SceneSpec single_plane();
};

/// Positions, labels and input features (x, y, z) for one scene.
PointCloud synth_scene(RngState& rng, const SceneSpec& spec);

std::vector<std::size_t> class_counts(const SceneSpec& spec);

}  // namespace swcf
