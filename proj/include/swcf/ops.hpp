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

// Differentiable tensor ops. Each records one tape node whose backward
// function is written out by hand next to its forward pass.

#include <cstddef>
#include <span>
#include <vector>

#include "swcf/tape.hpp"

namespace swcf {

using Index = std::size_t;

/// [M×D] · [D×E] → [M×E]
Var matmul(Var a, Var b);

Var add(Var a, Var b);
Var sub(Var a, Var b);
/// Elementwise product of equal-shape tensors.
Var mul(Var a, Var b);
Var scale(Var a, double c);
/// x[..., C] + bias[C] broadcast over rows.
Var add_bias(Var x, Var bias);
/// x[R×C] ⊙ s[R] (one scalar per row, broadcast across columns).
Var mul_col(Var x, Var s);
Var relu(Var x);

Var sum(Var x);
Var mean(Var x);
/// Reduce one axis away.
Var sum_axis(Var x, std::size_t axis);

/// Concatenate along the last axis; leading extents must agree.
Var concat(Var a, Var b);
/// Rows of `src` (viewed as rows×cols) picked by `idx` → [|idx| × cols].
Var gather_rows(Var src, std::span<const Index> idx);
/// out[idx[i]] += src[i]; out has `out_rows` rows.
Var scatter_add_rows(Var src, std::span<const Index> idx, std::size_t out_rows);
/// Numerically stable softmax along `axis`.
Var softmax(Var x, std::size_t axis);
Var softmax(Var x);
Var reshape(Var x, Shape shape);
/// Per-row standardisation (zero mean, unit variance), no affine terms.
Var layer_norm_rows(Var x, double eps = 1e-5);

}  // namespace swcf
