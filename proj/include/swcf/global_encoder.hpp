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
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "swcf/geometry.hpp"
#include "swcf/kernels.hpp"
#include "swcf/nn.hpp"

namespace swcf {

/// Parameters of one Average Transformer block:
///   T        = X + MHA(X·W_Q, A·W_K, A·W_V)
///   f_global = T + FFN(T)
/// where A holds P averaged key/value features.
struct AvgTransformerParams {
    Linear w_q;
    Linear w_k;
    Linear w_v;
    Linear out_proj;
    Mlp ffn;
    std::size_t heads = 4;
    std::size_t p = 176;
    std::size_t k = 16;
    /// Optional row normalisation after each residual sum (off by default).
    bool layer_norm = false;

    static AvgTransformerParams make(const std::string& name, std::size_t width, std::size_t heads, std::size_t p,
                                     std::size_t k, std::size_t ffn_width, RngState& rng);

    std::size_t width() const { return w_q.in(); }

    template <class F>
    void visit_params(F&& f) {
        for (Linear* l : {&w_q, &w_k, &w_v, &out_proj}) l->visit_params(f);
        ffn.visit_params(f);
    }
    template <class F>
    void visit_params(F&& f) const {
        for (const Linear* l : {&w_q, &w_k, &w_v, &out_proj}) l->visit_params(f);
        ffn.visit_params(f);
    }
};

struct DownsampledKeys {
    std::vector<Index> anchor_indices;  // P distinct FPS picks
    Tensor avg_features;                // [P×D], mean of each anchor's K neighbors
};

/// FPS picks P anchors (start from `fps_start`, or a draw from `rng`), then
/// each anchor's K nearest points among all N are averaged.
DownsampledKeys average_downsample(const PointCloud& cloud, std::size_t p, std::size_t k, RngState& rng,
                                   std::optional<Index> fps_start = std::nullopt);

struct DownsampledVar {
    std::vector<Index> anchor_indices;
    NeighborIndex groups;  // [P×K] into the N points
    Var avg_features;      // [P×D], differentiable w.r.t. the features
};

DownsampledVar average_downsample(const Tensor& positions, Var features, std::size_t p, std::size_t k,
                                  RngState& rng, std::optional<Index> fps_start = std::nullopt);

/// Stored by `attention_core` when requested, for inspection in tests.
struct AttentionTrace {
    Tensor weights;  // [H×N×P]
    Tensor values;   // [P×D] (A·W_V)
    Tensor heads;    // [N×D] concatenated per-head outputs, before out_proj
};

/// Differentiable multi-head attention of queries [N×D] over keys/values [P×D].
Var attention_core(Var q, Var k, Var v, std::size_t heads, MacCounter* counter = nullptr,
                   AttentionTrace* trace = nullptr);

/// T = X + out_proj(MHA(X·W_Q, A·W_K, A·W_V)).
Var avg_attention(Var x, Var a, const AvgTransformerParams& params, MacCounter* counter = nullptr,
                  AttentionTrace* trace = nullptr);

/// Exact MAC count of `avg_attention` for the given sizes:
/// 2·N·P·D (scores and weighted sum) + (2N + 2P)·D² (the four projections).
std::uint64_t avg_attention_macs(std::size_t n, std::size_t p, std::size_t d);

/// f_global = T + FFN(T) with A produced by `average_downsample`.
Var avg_transformer_block(const Tensor& positions, Var x, const AvgTransformerParams& params, RngState& rng,
                          std::optional<Index> fps_start = std::nullopt);
Var avg_transformer_block(Tape& tape, const PointCloud& cloud, const AvgTransformerParams& params, RngState& rng,
                          std::optional<Index> fps_start = std::nullopt);

struct BenchRow {
    std::size_t n = 0;
    std::string method;  // "avg" or "full"
    double median_seconds = 0.0;
    std::size_t reps = 0;
};

struct BenchOptions {
    std::size_t p = 176;
    std::size_t width = 16;
    std::size_t heads = 4;
    std::size_t repeats = 3;      // full attention
    std::size_t avg_repeats = 9;  // averaged attention (cheap, so more samples)
    std::uint64_t seed = 1;
    bool single_precision = true;
};

struct BenchResult {
    std::vector<BenchRow> rows;
    double avg_slope = 0.0;   // least-squares log-log slope of time vs N
    double full_slope = 0.0;
};

/// Times avg_attention against naive N×N self-attention for every N in
/// `sizes` (ascending). Single-threaded.
BenchResult bench_attention(const std::vector<std::size_t>& sizes, const BenchOptions& options);

/// `n,method,median_seconds,reps` with one row per (N, method).
std::string bench_csv(const BenchResult& result);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace swcf
