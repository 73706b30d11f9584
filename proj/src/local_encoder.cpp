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


#include "swcf/local_encoder.hpp"

#include <cmath>

#include "swcf/error.hpp"

namespace swcf {

namespace {

void check_neighbors(const NeighborIndex& nbrs, std::size_t n) {
    if (nbrs.rows != n) {
        throw DimensionError("neighbor table has " + std::to_string(nbrs.rows) + " rows for " + std::to_string(n) +
                             " points");
    }
    if (nbrs.k == 0) throw ArgumentError("neighbor table with K = 0");
}

Var cloud_features(Tape& tape, const PointCloud& cloud) {
    if (!cloud.features) throw StateError("point cloud has no features");
    return tape.constant(*cloud.features);
}

/// Row i of the [N·K] neighbor layout repeated K times.
std::vector<Index> query_rows(std::size_t n, std::size_t k) {
    std::vector<Index> rows(n * k);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) rows[i * k + j] = i;
    return rows;
}

/// Constant [N·K×3] table of x_j − x_i.
Tensor relative_positions(const Tensor& positions, const NeighborIndex& nbrs) {
    if (positions.rank() != 2 || positions.dim(1) != 3) {
        throw DimensionError("positions must be [N×3], got " + shape_str(positions.shape()));
    }
    Tensor rel(Shape{nbrs.rows * nbrs.k, 3});
    for (std::size_t i = 0; i < nbrs.rows; ++i)
        for (std::size_t j = 0; j < nbrs.k; ++j) {
            const Index n = nbrs.at(i, j);
            if (n >= positions.dim(0)) throw IndexError("neighbor index out of range");
            for (int a = 0; a < 3; ++a) rel.at(i * nbrs.k + j, a) = positions.at(n, a) - positions.at(i, a);
        }
    return rel;
}

/// g(x_j − x_i) ⊙ ψ(·) in the configured kernel mode → [N·K×D].
Var kernel_times_psi(const Tensor& positions, Var features, const NeighborIndex& nbrs, const SWConvParams& p) {
    Tape& tape = *features.tape;
    const std::size_t n = features.value().rows();
    check_neighbors(nbrs, n);
    if (positions.rank() != 2 || positions.dim(0) != n) {
        throw DimensionError("positions/features point count mismatch");
    }
    Var g = p.g(tape.constant(relative_positions(positions, nbrs)));
    const std::vector<Index> source = p.options.psi_on_query ? query_rows(n, nbrs.k) : nbrs.indices;
    Var psi = p.psi(gather_rows(features, source));
    return p.options.kernel == KernelMode::kScalar ? mul_col(psi, g) : mul(g, psi);
}

Var sum_over_neighbors(Var per_neighbor, std::size_t n, std::size_t k) {
    const std::size_t d = per_neighbor.value().cols();
    return sum_axis(reshape(per_neighbor, Shape{n, k, d}), 1);
}

}  // namespace

SWConvParams SWConvParams::make(const std::string& name, std::size_t in_width, std::size_t conv_width,
                                std::size_t out_width, RngState& rng, SWConvOptions options) {
    SWConvParams p;
    p.options = options;
    const std::size_t g_out = options.kernel == KernelMode::kScalar ? 1 : conv_width;
    p.g = Mlp::make(name + ".g", 3, conv_width, g_out, rng);
    p.phi = Mlp::make(name + ".phi", conv_width, conv_width, conv_width, rng);
    p.psi = Mlp::make(name + ".psi", conv_width, conv_width, conv_width, rng);
    p.alpha = Mlp::make(name + ".alpha", conv_width, out_width, out_width, rng);
    p.beta = Mlp::make(name + ".beta", in_width, conv_width, conv_width, rng);
    p.gamma = Mlp::make(name + ".gamma", in_width, out_width, out_width, rng);
    return p;
}

Var baseline_conv(const Tensor& positions, Var features, const NeighborIndex& nbrs, const SWConvParams& params) {
    Var prod = kernel_times_psi(positions, features, nbrs, params);
    return sum_over_neighbors(prod, nbrs.rows, nbrs.k);
}

Var baseline_conv(Tape& tape, const PointCloud& cloud, const NeighborIndex& nbrs, const SWConvParams& params) {
    return baseline_conv(cloud.positions, cloud_features(tape, cloud), nbrs, params);
}

Var similarity_weights(Var features, const NeighborIndex& nbrs, const Mlp& phi) {
    const std::size_t n = features.value().rows();
    check_neighbors(nbrs, n);
    Var fj = gather_rows(features, nbrs.indices);
    Var fi = gather_rows(features, query_rows(n, nbrs.k));
    Var scores = phi(sub(fj, fi));
    const std::size_t d = scores.value().cols();
    return softmax(reshape(scores, Shape{n, nbrs.k, d}), 1);
}

Var swconv(const Tensor& positions, Var features, const NeighborIndex& nbrs, const SWConvParams& params) {
    const std::size_t n = features.value().rows();
    Var kernel = kernel_times_psi(positions, features, nbrs, params);
    Var w = similarity_weights(features, nbrs, params.phi);
    Var weighted = mul(kernel, reshape(w, kernel.shape()));
    return sum_over_neighbors(weighted, n, nbrs.k);
}

Var swconv(Tape& tape, const PointCloud& cloud, const NeighborIndex& nbrs, const SWConvParams& params) {
    return swconv(cloud.positions, cloud_features(tape, cloud), nbrs, params);
}

Var local_block(const Tensor& positions, Var features, const NeighborIndex& nbrs, const SWConvParams& params) {
    Var lifted = params.beta(features);
    Var conv = swconv(positions, lifted, nbrs, params);
    return add(params.alpha(conv), params.gamma(features));
}

Var local_block(Tape& tape, const PointCloud& cloud, const NeighborIndex& nbrs, const SWConvParams& params) {
    return local_block(cloud.positions, cloud_features(tape, cloud), nbrs, params);
}

std::vector<double> local_dissimilarity(const Tensor& features, const NeighborIndex& nbrs) {
    const std::size_t d = features.cols();
    std::vector<double> out(nbrs.rows, 0.0);
    for (std::size_t i = 0; i < nbrs.rows; ++i) {
        auto row = nbrs.row(i);
        double best = 0.0;
        for (std::size_t a = 0; a < row.size(); ++a)
            for (std::size_t b = a + 1; b < row.size(); ++b) {
                double s = 0.0;
                for (std::size_t c = 0; c < d; ++c) {
                    const double diff = features.at(row[a], c) - features.at(row[b], c);
                    s += diff * diff;
                }
                best = std::max(best, s);
            }
        out[i] = std::sqrt(best);
    }
    return out;
}

}  // namespace swcf
