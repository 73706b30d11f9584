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
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>

#include "swcf/tensor.hpp"

namespace swcf {

class Tape;

/// Learnable tensor with a stable name (used by checkpoints and optimizers).
struct Parameter {
    std::string name;
    Tensor value;
};

/// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
struct Var {
    Tape* tape = nullptr;
    std::size_t id = 0;

    const Tensor& value() const;
    const Shape& shape() const { return value().shape(); }
};

/// Records a computation as a sequence of nodes, each carrying its forward
/// value and an explicit backward function. `backward` walks the nodes in
/// reverse order, accumulating gradients into every node that requires one.
///
/// A Tape is single-owner; independent tapes may run on different threads
/// against the same read-only Parameters.
class Tape {
  public:
    /// Receives the gradient flowing into the node; pushes gradients to the
    /// node's inputs through `Tape::accumulate` / `Tape::grad_span`.
    using BackwardFn = std::function<void(Tape&, const Tensor& grad_out)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Tensor value);
    Var leaf(Tensor value);
    /// Leaf bound to `p`; repeated calls return the same node.
    Var param(const Parameter& p);

    /// Appends an op result. The backward function is dropped when no input
    /// requires a gradient. Throws NumericError on non-finite values.
    Var record(Tensor value, std::span<const Var> inputs, BackwardFn backward, const char* op = "op");
    Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward, const char* op = "op") {
        return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
                      std::move(backward), op);
    }

    const Tensor& value(std::size_t id) const { return nodes_[id].value; }
    bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

    /// Mutable gradient buffer of a node, zero-initialised on first use.
    std::span<double> grad_span(std::size_t id);
    void accumulate(std::size_t id, const Tensor& g);

    /// Gradient of a node after backward (zeros when nothing reached it).
    Tensor grad(Var v) const;
    Tensor param_grad(const Parameter& p) const;
    bool has_param(const Parameter& p) const { return param_ids_.count(&p) != 0; }

    /// Seeds d(out)/d(out) = 1; `out` must hold a single value.
    void backward(Var out);
    void backward(Var out, const Tensor& seed);

    std::size_t size() const noexcept { return nodes_.size(); }

  private:
    struct Node {
        Tensor value;
        Tensor grad;
        bool requires_grad = false;
        BackwardFn backward;
    };

    std::deque<Node> nodes_;
    std::unordered_map<const Parameter*, std::size_t> param_ids_;
};

}  // namespace swcf
