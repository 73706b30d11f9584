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


#include "swcf/tape.hpp"

#include "swcf/error.hpp"

namespace swcf {

const Tensor& Var::value() const {
    if (tape == nullptr) throw StateError("use of an unbound Var");
    return tape->value(id);
}

Var Tape::constant(Tensor value) {
    nodes_.push_back(Node{std::move(value), Tensor(), false, nullptr});
    return Var{this, nodes_.size() - 1};
}

Var Tape::leaf(Tensor value) {
    nodes_.push_back(Node{std::move(value), Tensor(), true, nullptr});
    return Var{this, nodes_.size() - 1};
}

Var Tape::param(const Parameter& p) {
    if (auto it = param_ids_.find(&p); it != param_ids_.end()) return Var{this, it->second};
    Var v = leaf(p.value);
    param_ids_.emplace(&p, v.id);
    return v;
}

Var Tape::record(Tensor value, std::span<const Var> inputs, BackwardFn backward, const char* op) {
    if (!value.all_finite()) {
        throw NumericError(std::string("non-finite value produced by ") + op);
    }
    bool needs = false;
    for (const Var& in : inputs) {
        if (in.tape != this) throw StateError(std::string(op) + ": input belongs to another tape");
        needs = needs || nodes_[in.id].requires_grad;
    }
    nodes_.push_back(Node{std::move(value), Tensor(), needs, needs ? std::move(backward) : nullptr});
    return Var{this, nodes_.size() - 1};
}

std::span<double> Tape::grad_span(std::size_t id) {
    Node& n = nodes_[id];
    if (n.grad.shape() != n.value.shape() || n.grad.size() != n.value.size()) {
        n.grad = Tensor(n.value.shape(), 0.0);
    }
    return n.grad.data();
}

void Tape::accumulate(std::size_t id, const Tensor& g) {
    if (!nodes_[id].requires_grad) return;
    if (g.size() != nodes_[id].value.size()) {
        throw DimensionError("gradient of shape " + shape_str(g.shape()) + " for value of shape " +
                             shape_str(nodes_[id].value.shape()));
    }
    auto dst = grad_span(id);
    auto src = g.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

Tensor Tape::grad(Var v) const {
    const Node& n = nodes_[v.id];
    if (n.grad.size() == n.value.size() && n.grad.shape() == n.value.shape()) return n.grad;
    return Tensor(n.value.shape(), 0.0);
}

Tensor Tape::param_grad(const Parameter& p) const {
    auto it = param_ids_.find(&p);
    if (it == param_ids_.end()) return Tensor(p.value.shape(), 0.0);
    return grad(Var{const_cast<Tape*>(this), it->second});
}

void Tape::backward(Var out) {
    if (out.value().size() != 1) {
        throw DimensionError("backward() without seed needs a scalar output, got " +
                             shape_str(out.shape()));
    }
    backward(out, Tensor(out.shape(), 1.0));
}

void Tape::backward(Var out, const Tensor& seed) {
    if (out.tape != this) throw StateError("backward on a Var of another tape");
    if (seed.size() != value(out.id).size()) throw DimensionError("backward seed shape mismatch");
    accumulate(out.id, seed);
    for (std::size_t i = out.id + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.backward || n.grad.size() != n.value.size() || n.value.size() == 0) continue;
        // Backward functions only touch their inputs, which precede node i.
        n.backward(*this, n.grad);
    }
}

}  // namespace swcf
