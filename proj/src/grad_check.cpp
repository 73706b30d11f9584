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


#include "swcf/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "swcf/error.hpp"
#include "swcf/rng.hpp"

namespace swcf {

namespace {

double evaluate(const ScalarFn& fn, const std::vector<Tensor>& inputs) {
    Tape tape;
    std::vector<Var> vars;
    vars.reserve(inputs.size());
    for (const auto& t : inputs) vars.push_back(tape.constant(t));
    const Tensor& out = fn(tape, vars).value();
    if (out.size() != 1) throw DimensionError("grad_check: function must return a scalar");
    const double v = out[0];
    if (!std::isfinite(v)) throw NumericError("grad_check: function value is not finite");
    return v;
}

}  // namespace

GradCheckReport grad_check(const ScalarFn& fn, const std::vector<Tensor>& inputs,
                           const GradCheckOptions& options) {
    std::vector<Tensor> analytic;
    {
        Tape tape;
        std::vector<Var> vars;
        for (const auto& t : inputs) vars.push_back(tape.leaf(t));
        Var out = fn(tape, vars);
        if (out.value().size() != 1) throw DimensionError("grad_check: function must return a scalar");
        if (!std::isfinite(out.value()[0])) throw NumericError("grad_check: function value is not finite");
        tape.backward(out);
        for (const auto& v : vars) analytic.push_back(tape.grad(v));
    }

    GradCheckReport report;
    std::vector<Tensor> probe = inputs;
    RngState pick(0x6772616463686bULL);
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        const std::size_t n = inputs[k].size();
        std::vector<std::size_t> coords(n);
        std::iota(coords.begin(), coords.end(), std::size_t{0});
        if (options.max_coords_per_input && n > options.max_coords_per_input) {
            for (std::size_t i = 0; i < options.max_coords_per_input; ++i)
                std::swap(coords[i], coords[i + pick.below(n - i)]);
            coords.resize(options.max_coords_per_input);
        }
        InputGradReport r;
        for (std::size_t c : coords) {
            const double x0 = inputs[k][c];
            probe[k][c] = x0 + options.step;
            const double fp = evaluate(fn, probe);
            probe[k][c] = x0 - options.step;
            const double fm = evaluate(fn, probe);
            probe[k][c] = x0;
            const double numeric = (fp - fm) / (2.0 * options.step);
            const double a = analytic[k][c];
            r.max_abs_error = std::max(r.max_abs_error, std::abs(a - numeric));
            r.scale = std::max({r.scale, std::abs(a), std::abs(numeric)});
        }
        r.coords_checked = coords.size();
        r.rel_error = r.max_abs_error / std::max(r.scale, options.scale_floor);
        report.max_rel_error = std::max(report.max_rel_error, r.rel_error);
        report.inputs.push_back(r);
    }
    report.passed = report.max_rel_error <= options.tol;
    return report;
}

}  // namespace swcf
