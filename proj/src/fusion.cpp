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


#include "swcf/fusion.hpp"

#include <cmath>
#include <memory>
#include <vector>

#include "swcf/error.hpp"

namespace swcf {

FusionParams FusionParams::make(const std::string& name, std::size_t width, RngState& rng, FusionMode mode,
                                OrthDenominator denominator, double eps) {
    if (!(eps > 0.0)) throw ConfigError(name + ": fusion eps must be positive");
    FusionParams f;
    f.mode = mode;
    f.denominator = denominator;
    f.eps = eps;
    if (mode != FusionMode::kLocalOnly) f.delta = Linear::make(name + ".delta", 2 * width, width, rng);
    return f;
}

Var orthogonalize(Var local, Var global, double eps, OrthDenominator denominator) {
    const Tensor& lv = local.value();
    const Tensor& gv = global.value();
    if (lv.shape() != gv.shape() || lv.rank() == 0) {
        throw DimensionError("orthogonalize: shape mismatch " + shape_str(lv.shape()) + " vs " + shape_str(gv.shape()));
    }
    if (local.tape != global.tape) throw StateError("orthogonalize: Vars on different tapes");
    const std::size_t rows = lv.rows(), d = lv.cols();
    const bool squared = denominator == OrthDenominator::kSquaredNorm;

    // Per row: dot = ⟨l,g⟩, den, c = dot/den.
    auto dot = std::make_shared<std::vector<double>>(rows);
    auto den = std::make_shared<std::vector<double>>(rows);
    Tensor out = gv;
    for (std::size_t r = 0; r < rows; ++r) {
        double lg = 0.0, ll = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            lg += lv[r * d + c] * gv[r * d + c];
            ll += lv[r * d + c] * lv[r * d + c];
        }
        const double dn = squared ? ll + eps : std::sqrt(ll + eps);
        (*dot)[r] = lg;
        (*den)[r] = dn;
        const double coef = lg / dn;
        for (std::size_t c = 0; c < d; ++c) out[r * d + c] -= coef * lv[r * d + c];
    }
    const std::size_t li = local.id, gi = global.id;
    return local.tape->record(std::move(out), {local, global}, [=](Tape& t, const Tensor& go) {
        const Tensor& lv = t.value(li);
        const Tensor& gv = t.value(gi);
        double* dl = t.requires_grad(li) ? t.grad_span(li).data() : nullptr;
        double* dg = t.requires_grad(gi) ? t.grad_span(gi).data() : nullptr;
        for (std::size_t r = 0; r < rows; ++r) {
            const double dn = (*den)[r];
            const double coef = (*dot)[r] / dn;
            double s = 0.0;  // ⟨go, l⟩
            for (std::size_t c = 0; c < d; ++c) s += go[r * d + c] * lv[r * d + c];
            // ∂den/∂l = 2l (squared) or l/den (norm).
            const double dden = squared ? 2.0 : 1.0 / dn;
            for (std::size_t c = 0; c < d; ++c) {
                const std::size_t k = r * d + c;
                if (dg) dg[k] += go[k] - s * lv[k] / dn;
                if (dl) {
                    const double dcoef = gv[k] / dn - (*dot)[r] / (dn * dn) * dden * lv[k];
                    dl[k] += -coef * go[k] - s * dcoef;
                }
            }
        }
    }, "orthogonalize");
}

Var fuse(Var local, Var global, const FusionParams& params) {
    switch (params.mode) {
        case FusionMode::kLocalOnly:
            return local;
        case FusionMode::kConcat:
            return relu(params.delta(concat(local, global)));
        case FusionMode::kOrthogonal:
            break;
    }
    Var orth = orthogonalize(local, global, params.eps, params.denominator);
    return relu(params.delta(concat(local, orth)));
}

}  // namespace swcf
