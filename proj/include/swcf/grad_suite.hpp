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

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "swcf/grad_check.hpp"
#include "swcf/nn.hpp"

namespace swcf {

struct GradCase {
    std::string name;
    double max_rel_error = 0.0;
    std::size_t coords_checked = 0;
    bool passed = false;
};

/// Central differences over Parameter values: `fn` rebuilds the scalar on a
/// fresh tape each call, reading the (perturbed) parameters.
GradCheckReport grad_check_params(const std::function<Var(Tape&)>& fn, const std::vector<Parameter*>& params,
                                  const GradCheckOptions& options = {});

/// Every differentiable op and composite block at 64-bit, small sizes.
std::vector<GradCase> run_grad_suite(std::uint64_t seed = 1, double tol = 1e-4,
                                     const std::function<void(const GradCase&)>& on_case = {});

}  // namespace swcf
