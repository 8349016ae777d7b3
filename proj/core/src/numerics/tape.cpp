// SPDX-License-Identifier: Apache-2.0
#include "trelab/numerics/tape.hpp"

#include "trelab/error.hpp"

namespace trelab::numerics {

Parameter::Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}

const Tensor& Var::value() const { return tape_->value(index_); }

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, {}, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Parameter& param) {
  if (auto it = leaves_.find(&param); it != leaves_.end()) return Var(this, it->second);
  if (param.grad.shape() != param.value.shape()) param.grad = Tensor(param.value.shape());
  // Leaves copy the value so later in-place updates of the parameter cannot
  // corrupt an in-flight graph.
  nodes_.push_back(Node{param.value, {}, {}, &param});
  leaves_.emplace(&param, nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, Backward backward) {
  nodes_.push_back(Node{std::move(value), {}, std::move(backward), nullptr});
  return Var(this, nodes_.size() - 1);
}

Tensor& Tape::grad(std::size_t index) {
  Node& node = nodes_[index];
  if (node.grad.shape() != node.value.shape()) node.grad = Tensor(node.value.shape());
  return node.grad;
}

void Tape::backward(Var loss) {
  if (&loss.tape() != this) throw ContractError("loss was not recorded on this tape");
  if (loss.value().size() != 1) {
    throw DimensionError("backward needs a scalar loss, got " + to_string(loss.value().shape()));
  }
  for (Node& node : nodes_) node.grad = Tensor();
  grad(loss.index()).fill(1.0);

  for (std::size_t i = loss.index() + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (node.grad.empty()) continue;  // not on a path to the loss
    if (node.backward) node.backward(*this, node.value, node.grad);
  }
  for (Node& node : nodes_) {
    if (node.param != nullptr && !node.grad.empty()) node.param->grad += node.grad;
  }
}

}  // namespace trelab::numerics
