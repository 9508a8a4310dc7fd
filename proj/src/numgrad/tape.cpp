#include "sscl/numgrad/tape.hpp"

#include "sscl/error.hpp"

namespace sscl::numgrad {

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, false, {}, {}, nullptr});
  return Var{nodes_.size() - 1};
}

Var Tape::variable(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, true, {}, {}, nullptr});
  return Var{nodes_.size() - 1};
}

Var Tape::parameter(Parameter& param) {
  nodes_.push_back(Node{param.value, {}, true, {}, {}, &param});
  return Var{nodes_.size() - 1};
}

Var Tape::record(Tensor value, std::vector<Var> inputs, BackwardFn fn) {
  bool any = false;
  for (const Var in : inputs) {
    if (in.id >= nodes_.size()) throw Error(ErrorCode::InvalidShape, "tape input refers to a future node");
    any = any || nodes_[in.id].requires_grad;
  }
  Node node{std::move(value), {}, any, std::move(inputs), {}, nullptr};
  if (any) node.backward = std::move(fn);
  nodes_.push_back(std::move(node));
  return Var{nodes_.size() - 1};
}

void Tape::backward(Var loss) {
  Node& root = nodes_.at(loss.id);
  if (root.value.size() != 1) {
    throw Error(ErrorCode::InvalidShape, "backward() needs a scalar loss, got " + to_string(root.value.shape()));
  }
  for (Node& n : nodes_) n.grad.resize(0);
  backward_calls_ = 0;
  if (!root.requires_grad) return;

  root.grad = Vector::Ones(1);
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.grad.size() == 0) continue;
    if (n.backward) {
      n.backward(*this, i);
      ++backward_calls_;
    }
    if (n.param != nullptr) {
      if (n.param->grad.size() != n.grad.size()) n.param->grad.setZero(n.grad.size());
      n.param->grad += n.grad;
    }
  }
}

}  // namespace sscl::numgrad
