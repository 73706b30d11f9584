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

#include "swcf/ops.hpp"
#include "swcf/rng.hpp"
#include "swcf/tape.hpp"

namespace swcf {

/// y = x·W (+ b), W stored as [in × out].
struct Linear {
    Parameter weight;
    Parameter bias;
    bool has_bias = true;

    static Linear make(const std::string& name, std::size_t in, std::size_t out, RngState& rng,
                       bool with_bias = true);

    std::size_t in() const { return weight.value.dim(0); }
    std::size_t out() const { return weight.value.dim(1); }

    Var operator()(Var x) const;

    template <class F>
    void visit_params(F&& f) {
        f(weight);
        if (has_bias) f(bias);
    }
    template <class F>
    void visit_params(F&& f) const {
        f(weight);
        if (has_bias) f(bias);
    }
};

/// One hidden layer with a rectifier: y = L2(relu(L1(x))).
struct Mlp {
    Linear hidden;
    Linear output;

    static Mlp make(const std::string& name, std::size_t in, std::size_t hidden_width, std::size_t out,
                    RngState& rng);

    std::size_t in() const { return hidden.in(); }
    std::size_t out() const { return output.out(); }

    Var operator()(Var x) const { return output(relu(hidden(x))); }

    template <class F>
    void visit_params(F&& f) {
        hidden.visit_params(f);
        output.visit_params(f);
    }
    template <class F>
    void visit_params(F&& f) const {
        hidden.visit_params(f);
        output.visit_params(f);
    }
};

/// Sets every value of every parameter reachable from `module` to zero.
template <class Module>
void zero_params(Module& module) {
    module.visit_params([](Parameter& p) { p.value.fill(0.0); });
}

template <class Module>
std::size_t count_params(const Module& module) {
    std::size_t n = 0;
    module.visit_params([&n](const Parameter& p) { n += p.value.size(); });
    return n;
}

}  // namespace swcf
