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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "swcf/tape.hpp"

namespace swcf {

/// Builds a scalar from leaf Vars on a fresh tape. Must be pure: the same
/// input values always give the same output.
using ScalarFn = std::function<Var(Tape&, std::span<const Var>)>;

struct GradCheckOptions {
    double step = 1e-5;
    double tol = 1e-4;
    /// Lower bound on the gradient scale used to normalise the error, so an
    /// all-zero gradient is compared in absolute terms.
    double scale_floor = 1e-6;
    /// Check at most this many coordinates per input (0 = all). Picked by a
    /// fixed-seed stream, so reports are reproducible.
    std::size_t max_coords_per_input = 0;
};

struct InputGradReport {
    double max_abs_error = 0.0;
    double scale = 0.0;
    /// max_abs_error / max(scale, scale_floor), where scale is the largest
    /// magnitude in either gradient.
    double rel_error = 0.0;
    std::size_t coords_checked = 0;
};

struct GradCheckReport {
    std::vector<InputGradReport> inputs;
    double max_rel_error = 0.0;
    bool passed = false;
};

/// Compares the tape's reverse-mode gradient against central differences.
/// Throws NumericError when the function value is not finite.
GradCheckReport grad_check(const ScalarFn& fn, const std::vector<Tensor>& inputs,
                           const GradCheckOptions& options = {});

}  // namespace swcf
