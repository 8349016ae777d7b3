// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "trelab/numerics/tensor.hpp"

namespace trelab::numerics {

// A trainable tensor and its accumulated gradient.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Tensor value);

  std::string name;
  Tensor value;
  Tensor grad;

  void zero_grad() { grad.fill(0.0); }
};

class Tape;

// Handle to a value recorded on a Tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t index) : tape_(tape), index_(index) {}

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  Tape& tape() const { return *tape_; }
  std::size_t index() const noexcept { return index_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  std::size_t index_ = 0;
};

// Records executed operations for reverse-mode differentiation.
//
// Every recorded node owns its forward value. backward() walks nodes in exact
// reverse order of recording and adds each parameter leaf's gradient into
// Parameter::grad, so repeated calls (or parameters read through several
// paths) accumulate.
class Tape {
 public:
  // Receives the node's forward value and the gradient of that output, and
  // accumulates into its inputs through Tape::grad().
  using Backward = std::function<void(Tape&, const Tensor& out, const Tensor& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  // Leaf bound to `param`. Repeated calls for the same parameter return the same leaf.
  Var parameter(Parameter& param);
  Var record(Tensor value, Backward backward);

  const Tensor& value(std::size_t index) const { return nodes_[index].value; }
  // Gradient buffer of a node; only meaningful during backward().
  Tensor& grad(std::size_t index);
  const Tensor& grad_of(Var v) const { return nodes_[v.index()].grad; }

  void backward(Var loss);

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    Backward backward;
    Parameter* param = nullptr;
  };

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> leaves_;
};

}  // namespace trelab::numerics
