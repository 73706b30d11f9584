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

#include "swcf/nn.hpp"

namespace swcf {

/// Denominator of the projection coefficient ⟨l, g⟩ / den.
enum class OrthDenominator {
    kSquaredNorm,  ///< ‖l‖² + eps: exact orthogonal rejection
    kNorm,         ///< sqrt(‖l‖² + eps): first-power variant
};

enum class FusionMode {
    kOrthogonal,  ///< δ([l, g − proj_l(g)])
    kConcat,      ///< δ([l, g])
    kLocalOnly,   ///< pass l through unchanged
};

struct FusionParams {
    Linear delta;  // 2D → D, followed by a rectifier
    FusionMode mode = FusionMode::kOrthogonal;
    OrthDenominator denominator = OrthDenominator::kSquaredNorm;
    double eps = 1e-12;

    static FusionParams make(const std::string& name, std::size_t width, RngState& rng,
                             FusionMode mode = FusionMode::kOrthogonal,
                             OrthDenominator denominator = OrthDenominator::kSquaredNorm, double eps = 1e-12);

    template <class F>
    void visit_params(F&& f) {
        if (mode != FusionMode::kLocalOnly) delta.visit_params(f);
    }
    template <class F>
    void visit_params(F&& f) const {
        if (mode != FusionMode::kLocalOnly) delta.visit_params(f);
    }
};

/// Row-wise f_orth = g − (⟨l, g⟩ / den) · l.
Var orthogonalize(Var local, Var global, double eps = 1e-12,
                  OrthDenominator denominator = OrthDenominator::kSquaredNorm);

/// relu(δ([l, f_orth])) in orthogonal mode; see FusionMode for the others.
Var fuse(Var local, Var global, const FusionParams& params);

}  // namespace swcf
