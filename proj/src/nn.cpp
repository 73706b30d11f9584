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


#include "swcf/nn.hpp"

#include <cmath>

#include "swcf/error.hpp"

namespace swcf {

Linear Linear::make(const std::string& name, std::size_t in, std::size_t out, RngState& rng, bool with_bias) {
    if (in == 0 || out == 0) throw ConfigError("linear layer '" + name + "' with zero width");
    Linear l;
    l.has_bias = with_bias;
    l.weight.name = name + ".weight";
    l.weight.value = Tensor(Shape{in, out});
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    for (double& w : l.weight.value.data()) w = rng.uniform(-bound, bound);
    l.bias.name = name + ".bias";
    l.bias.value = with_bias ? Tensor(Shape{out}, 0.0) : Tensor();
    return l;
}

Var Linear::operator()(Var x) const {
    Tape& t = *x.tape;
    const Tensor& xv = x.value();
    if (xv.cols() != in()) {
        throw DimensionError(weight.name + ": input width " + std::to_string(xv.cols()) + ", expected " +
                             std::to_string(in()));
    }
    Var flat = xv.rank() == 2 ? x : reshape(x, Shape{xv.rows(), xv.cols()});
    Var y = matmul(flat, t.param(weight));
    if (has_bias) y = add_bias(y, t.param(bias));
    return y;
}

Mlp Mlp::make(const std::string& name, std::size_t in, std::size_t hidden_width, std::size_t out,
              RngState& rng) {
    Mlp m;
    m.hidden = Linear::make(name + ".hidden", in, hidden_width, rng);
    m.output = Linear::make(name + ".output", hidden_width, out, rng);
    return m;
}

}  // namespace swcf
