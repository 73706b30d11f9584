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
#include <optional>
#include <span>
#include <vector>

#include "swcf/ops.hpp"
#include "swcf/rng.hpp"
#include "swcf/tensor.hpp"

namespace swcf {

/// N positions in meters plus optional per-point features and labels.
struct PointCloud {
    Tensor positions;               // [N×3]
    std::optional<Tensor> features; // [N×D]
    std::optional<std::vector<int>> labels;

    std::size_t size() const { return positions.rank() == 2 ? positions.dim(0) : 0; }
    /// Throws DataError when an invariant is broken.
    void validate() const;
    /// Sub-cloud with rows `idx` of every present field.
    PointCloud select(std::span<const Index> idx) const;
};

/// Row-major M×K table of neighbor indices into a source cloud.
struct NeighborIndex {
    std::size_t rows = 0;
    std::size_t k = 0;
    std::vector<Index> indices;

    std::span<const Index> row(std::size_t i) const {
        return std::span<const Index>(indices).subspan(i * k, k);
    }
    Index at(std::size_t i, std::size_t j) const { return indices[i * k + j]; }
};

/// Greedy max-min farthest point sampling. First pick is `start`; every later
/// pick maximises the squared distance to the picked set, lowest index on ties.
std::vector<Index> fps(const Tensor& positions, std::size_t count, Index start);
std::vector<Index> fps(const PointCloud& cloud, std::size_t count, Index start);

/// Exact K nearest neighbors under the Euclidean metric. Rows are sorted by
/// (squared distance, source index). Uses a uniform grid with a brute-force
/// path for tiny inputs.
NeighborIndex knn(const Tensor& queries, const Tensor& source, std::size_t k);
/// Reference O(M·N) search; same ordering rule as `knn`.
NeighborIndex knn_brute_force(const Tensor& queries, const Tensor& source, std::size_t k);

/// ⌈n·ratio⌉, robust to representation error in `ratio`.
std::size_t downsample_count(std::size_t n, double ratio);

/// ⌈N·ratio⌉ distinct indices drawn uniformly, returned in ascending order.
std::vector<Index> random_subset(std::size_t n, double ratio, RngState& rng);

struct Downsampled {
    PointCloud cloud;
    std::vector<Index> kept;
};

Downsampled random_downsample(const PointCloud& cloud, double ratio, RngState& rng);

/// For every fine point, the index of its nearest coarse point.
std::vector<Index> nn_upsample_map(const Tensor& coarse, const Tensor& fine);

}  // namespace swcf
