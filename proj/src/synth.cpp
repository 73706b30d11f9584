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


#include "swcf/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "swcf/error.hpp"
#include "swcf/network.hpp"

namespace swcf {

namespace {

struct Box {
    double cx, cy, hx, hy, h;

    /// Horizontal distance from (x, y) to the footprint.
    double distance(double x, double y) const {
        const double dx = std::max(std::abs(x - cx) - hx, 0.0);
        const double dy = std::max(std::abs(y - cy) - hy, 0.0);
        return std::hypot(dx, dy);
    }
};

using Point = std::array<double, 3>;

std::vector<Box> place_boxes(RngState& rng, const SceneSpec& spec) {
    std::vector<Box> boxes;
    const double margin = 4.0;
    for (std::size_t b = 0; b < spec.boxes; ++b) {
        Box best{};
        double best_gap = -1.0;
        for (int attempt = 0; attempt < 50; ++attempt) {
            Box c{rng.uniform(-spec.half_extent + margin, spec.half_extent - margin),
                  rng.uniform(-spec.half_extent + margin, spec.half_extent - margin), rng.uniform(1.5, 2.5),
                  rng.uniform(1.5, 2.5), rng.uniform(3.0, 6.0)};
            double gap = 1e9;
            for (const Box& o : boxes) gap = std::min(gap, o.distance(c.cx, c.cy) - std::max(c.hx, c.hy));
            if (gap > best_gap) {
                best = c;
                best_gap = gap;
            }
            if (gap > 3.0) break;
        }
        boxes.push_back(best);
    }
    return boxes;
}

void sample_plane(RngState& rng, const SceneSpec& spec, std::size_t n, std::vector<Point>& out) {
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back({rng.uniform(-spec.half_extent, spec.half_extent), rng.uniform(-spec.half_extent, spec.half_extent),
                       spec.noise * rng.normal()});
    }
}

void sample_box(RngState& rng, const SceneSpec& spec, const Box& b, std::size_t n, std::vector<Point>& out) {
    // Area-weighted choice among four walls and the roof.
    const double wx = 2 * b.hx * b.h, wy = 2 * b.hy * b.h, roof = 4 * b.hx * b.hy;
    const double total = 2 * wx + 2 * wy + roof;
    for (std::size_t i = 0; i < n; ++i) {
        double u = rng.uniform() * total;
        const double s = rng.uniform(-1.0, 1.0), t = rng.uniform();
        Point p{};
        if (u < roof) {
            p = {b.cx + s * b.hx, b.cy + rng.uniform(-1.0, 1.0) * b.hy, b.h};
        } else if ((u -= roof) < 2 * wx) {
            p = {b.cx + s * b.hx, b.cy + (u < wx ? -b.hy : b.hy), t * b.h};
        } else {
            u -= 2 * wx;
            p = {b.cx + (u < wy ? -b.hx : b.hx), b.cy + s * b.hy, t * b.h};
        }
        for (double& v : p) v += spec.noise * rng.normal();
        out.push_back(p);
    }
}

void sample_cylinder(RngState& rng, const SceneSpec& spec, double cx, double cy, std::size_t n,
                     std::vector<Point>& out) {
    const double r = 0.3, h = 3.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = rng.uniform(0.0, 2.0 * std::numbers::pi);
        out.push_back({cx + r * std::cos(a) + spec.noise * rng.normal(), cy + r * std::sin(a) + spec.noise * rng.normal(),
                       rng.uniform(0.0, h)});
    }
}

void sample_blob(RngState& rng, double cx, double cy, std::size_t n, std::vector<Point>& out) {
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back({cx + 0.2 * rng.normal(), cy + 0.2 * rng.normal(), std::max(0.0, 0.9 + 0.4 * rng.normal())});
    }
}

/// Ground position with every building at least `gap` away (best of many tries).
std::array<double, 2> far_spot(RngState& rng, const SceneSpec& spec, const std::vector<Box>& boxes) {
    std::array<double, 2> best{0, 0};
    double best_d = -1.0;
    for (int attempt = 0; attempt < 200; ++attempt) {
        const double x = rng.uniform(-spec.half_extent + 1, spec.half_extent - 1);
        const double y = rng.uniform(-spec.half_extent + 1, spec.half_extent - 1);
        double d = 1e9;
        for (const Box& b : boxes) d = std::min(d, b.distance(x, y));
        if (d > best_d) {
            best_d = d;
            best = {x, y};
        }
        if (d >= spec.far_gap) break;
    }
    return best;
}

std::array<double, 2> near_spot(RngState& rng, const SceneSpec& spec, const Box& b) {
    const auto side = rng.below(4);
    const double s = rng.uniform(-0.8, 0.8);
    switch (side) {
        case 0: return {b.cx - b.hx - spec.near_gap, b.cy + s * b.hy};
        case 1: return {b.cx + b.hx + spec.near_gap, b.cy + s * b.hy};
        case 2: return {b.cx + s * b.hx, b.cy - b.hy - spec.near_gap};
        default: return {b.cx + s * b.hx, b.cy + b.hy + spec.near_gap};
    }
}

/// Splits n as evenly as possible over `parts` objects.
std::size_t share(std::size_t n, std::size_t parts, std::size_t i) { return n / parts + (i < n % parts ? 1 : 0); }

}  // namespace

SceneSpec SceneSpec::default_spec() {
    SceneSpec s;
    s.classes = {{"ground", ShapeKind::kPlane, 0.45},
                 {"building", ShapeKind::kBox, 0.30},
                 {"trunk", ShapeKind::kCylinder, 0.15},
                 {"pedestrian", ShapeKind::kClusterNearBox, 0.10}};
    return s;
}

SceneSpec SceneSpec::semantic_context() {
    SceneSpec s;
    s.classes = {{"ground", ShapeKind::kPlane, 0.40},
                 {"building", ShapeKind::kBox, 0.30},
                 {"near_cluster", ShapeKind::kClusterNearBox, 0.15},
                 {"far_cluster", ShapeKind::kClusterFarFromBox, 0.15}};
    return s;
}

SceneSpec SceneSpec::single_plane() {
    SceneSpec s;
    s.classes = {{"ground", ShapeKind::kPlane, 1.0}};
    return s;
}

std::vector<std::size_t> class_counts(const SceneSpec& spec) {
    if (spec.classes.empty()) throw ConfigError("scene spec without classes");
    std::vector<std::size_t> counts(spec.classes.size());
    std::size_t used = 0;
    for (std::size_t c = 1; c < counts.size(); ++c) {
        counts[c] = static_cast<std::size_t>(std::llround(static_cast<double>(spec.points) * spec.classes[c].proportion));
        used += counts[c];
    }
    if (used > spec.points) throw ConfigError("scene class proportions exceed 1");
    counts[0] = spec.points - used;
    return counts;
}

PointCloud synth_scene(RngState& rng, const SceneSpec& spec) {
    const std::vector<std::size_t> counts = class_counts(spec);
    const std::vector<Box> boxes = place_boxes(rng, spec);
    std::vector<Point> pts;
    std::vector<int> labels;
    pts.reserve(spec.points);
    for (std::size_t c = 0; c < spec.classes.size(); ++c) {
        const std::size_t n = counts[c];
        const std::size_t before = pts.size();
        switch (spec.classes[c].kind) {
            case ShapeKind::kPlane:
                sample_plane(rng, spec, n, pts);
                break;
            case ShapeKind::kBox:
                if (boxes.empty()) throw ConfigError("box class needs at least one box");
                for (std::size_t b = 0; b < boxes.size(); ++b) sample_box(rng, spec, boxes[b], share(n, boxes.size(), b), pts);
                break;
            case ShapeKind::kCylinder: {
                const std::size_t m = std::max<std::size_t>(spec.cylinders, 1);
                for (std::size_t i = 0; i < m; ++i) {
                    auto spot = far_spot(rng, spec, boxes);
                    sample_cylinder(rng, spec, spot[0], spot[1], share(n, m, i), pts);
                }
                break;
            }
            case ShapeKind::kClusterNearBox: {
                if (boxes.empty()) throw ConfigError("near-box clusters need at least one box");
                const std::size_t m = std::max<std::size_t>(spec.clusters, 1);
                for (std::size_t i = 0; i < m; ++i) {
                    auto spot = near_spot(rng, spec, boxes[i % boxes.size()]);
                    sample_blob(rng, spot[0], spot[1], share(n, m, i), pts);
                }
                break;
            }
            case ShapeKind::kClusterFarFromBox: {
                const std::size_t m = std::max<std::size_t>(spec.clusters, 1);
                for (std::size_t i = 0; i < m; ++i) {
                    auto spot = far_spot(rng, spec, boxes);
                    sample_blob(rng, spot[0], spot[1], share(n, m, i), pts);
                }
                break;
            }
        }
        labels.insert(labels.end(), pts.size() - before, static_cast<int>(c));
    }
    Tensor positions(Shape{pts.size(), 3});
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (int a = 0; a < 3; ++a) positions.at(i, a) = pts[i][a];
    PointCloud cloud;
    cloud.features = input_features(positions);
    cloud.positions = std::move(positions);
    cloud.labels = std::move(labels);
    return cloud;
}

}  // namespace swcf
