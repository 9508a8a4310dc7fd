#pragma once

#include "sscl/numgrad/tensor.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace sscl::numgrad {

class Tape;

// Handle to a value recorded on a Tape.
struct Var {
  std::size_t id = 0;
};

// Called once during the reverse sweep with the node's own id. Reads the
// upstream gradient via tape.grad(self) and pushes into inputs with
// tape.accumulate().
using BackwardFn = std::function<void(Tape& tape, std::size_t self)>;

// Records operations in execution order, which is also a topological order:
// a node can only reference inputs that already exist.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  Var constant(Tensor value);
  Var variable(Tensor value);       // leaf that requires a gradient
  Var parameter(Parameter& param);  // leaf whose gradient is added to param.grad

  // Output requires a gradient iff any input does; otherwise `fn` is dropped.
  Var record(Tensor value, std::vector<Var> inputs, BackwardFn fn);

  const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }

  // Gradient of the last backward() target; zero-sized if never reached.
  const Vector& grad(Var v) const { return nodes_.at(v.id).grad; }
  const Vector& grad(std::size_t id) const { return nodes_.at(id).grad; }

  template <typename Derived>
  void accumulate(Var v, const Eigen::MatrixBase<Derived>& g) {
    Node& n = nodes_[v.id];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0) n.grad.setZero(n.value.size());
    n.grad += g;
  }

  bool needs_grad(Var v) const { return nodes_[v.id].requires_grad; }

  // Reverse sweep from a scalar; flushes leaf gradients into their Parameters.
  void backward(Var loss);

  std::size_t size() const noexcept { return nodes_.size(); }
  std::size_t backward_calls() const noexcept { return backward_calls_; }

 private:
  struct Node {
    Tensor value;
    Vector grad;
    bool requires_grad = false;
    std::vector<Var> inputs;
    BackwardFn backward;
    Parameter* param = nullptr;
  };

  std::vector<Node> nodes_;
  std::size_t backward_calls_ = 0;
};

}  // namespace sscl::numgrad
