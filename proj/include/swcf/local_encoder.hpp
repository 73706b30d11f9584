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
#include "swcf/nn.hpp"

namespace swcf {

/// How the position kernel g combines with the feature path.
enum class KernelMode {
    kPerChannel,  ///< g(Δx) is D-wide and multiplies per channel
    kScalar,      ///< g(Δx) is one scalar per neighbor, broadcast over channels
};

struct SWConvOptions {
    KernelMode kernel = KernelMode::kPerChannel;
    /// Evaluate ψ on the query feature f_i instead of the neighbor f_j.
    bool psi_on_query = false;
};

/// Learnable pieces of one local feature block:
///   f_local = α(SWConv(x, β(f))) + γ(f)
///   SWConv  = Σ_j g(x_j − x_i) ⊙ softmax_j(φ(f_j − f_i)) ⊙ ψ(f_j)
struct SWConvParams {
    Mlp g;      // 3 → D (or 1 in scalar kernel mode)
    Mlp phi;    // D → D
    Mlp psi;    // D → D
    Mlp alpha;  // D → D_out
    Mlp beta;   // D_in → D
    Mlp gamma;  // D_in → D_out
    SWConvOptions options;

    static SWConvParams make(const std::string& name, std::size_t in_width, std::size_t conv_width,
                             std::size_t out_width, RngState& rng, SWConvOptions options = {});

    std::size_t conv_width() const { return phi.out(); }

    template <class F>
    void visit_params(F&& f) {
        for (Mlp* m : {&g, &phi, &psi, &alpha, &beta, &gamma}) m->visit_params(f);
    }
    template <class F>
    void visit_params(F&& f) const {
        for (const Mlp* m : {&g, &phi, &psi, &alpha, &beta, &gamma}) m->visit_params(f);
    }
};

/// Σ_j g(x_j − x_i) ⊙ ψ(f_j) over the K neighbors of every point → [N×D].
Var baseline_conv(const Tensor& positions, Var features, const NeighborIndex& nbrs, const SWConvParams& params);
Var baseline_conv(Tape& tape, const PointCloud& cloud, const NeighborIndex& nbrs, const SWConvParams& params);

/// softmax over the K neighbors, per channel, of φ(f_j − f_i) → [N×K×D].
Var similarity_weights(Var features, const NeighborIndex& nbrs, const Mlp& phi);

Var swconv(const Tensor& positions, Var features, const NeighborIndex& nbrs, const SWConvParams& params);
Var swconv(Tape& tape, const PointCloud& cloud, const NeighborIndex& nbrs, const SWConvParams& params);

/// α(SWConv(x, β(f))) + γ(f).
Var local_block(const Tensor& positions, Var features, const NeighborIndex& nbrs, const SWConvParams& params);
Var local_block(Tape& tape, const PointCloud& cloud, const NeighborIndex& nbrs, const SWConvParams& params);

/// Largest pairwise feature distance inside each neighborhood (diagnostic,
/// not differentiable).
std::vector<double> local_dissimilarity(const Tensor& features, const NeighborIndex& nbrs);

}  // namespace swcf
