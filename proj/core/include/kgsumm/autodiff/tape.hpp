#pragma once

#include <deque>
#include <functional>
#include <span>
#include <vector>

#include "kgsumm/autodiff/parameter.hpp"
#include "kgsumm/autodiff/tensor.hpp"

namespace kgsumm::ad {

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  bool valid() const { return tape_ != nullptr; }
  Tape& tape() const { return *tape_; }
  int id() const { return id_; }
  const Tensor& value() const;
  Shape shape() const { return value().shape(); }
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  bool requires_grad() const;

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Reverse-mode recording of one forward pass. Nodes are appended in evaluation
// order, so reverse insertion order is a reverse topological order.
//
// A tape is single-threaded. Parameter values are referenced, never copied,
// and must outlive the tape.
class Tape {
 public:
  // Receives the output gradient and the op's own output value.
  using BackwardFn =
      std::function<void(const Matrix& grad_out, const Tensor& out, Tape& tape)>;

  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool grad_enabled() const { return grad_enabled_; }

  Var constant(Tensor value);
  // Leaf whose gradient is kept on the tape and readable through grad().
  Var leaf(Tensor value);
  Var param(const ParameterStore& store, ParamId id);

  // Records an op result. `fn` is kept only if some parent requires grad.
  Var record(Tensor value, std::initializer_list<int> parents, BackwardFn fn);
  Var record(Tensor value, const std::vector<int>& parents, BackwardFn fn);

  const Tensor& value(int id) const;
  bool requires_grad(int id) const { return nodes_.at(id).requires_grad; }
  // Adds `g` into the gradient of node `id` if that node requires grad.
  void accumulate(int id, const Matrix& g);
  // Adds `g` into the block of node `id`'s gradient starting at (row, col).
  void accumulate_block(int id, Index row, Index col, const Matrix& g);
  void accumulate_rows(int id, std::span<const Index> rows, const Matrix& g);
  // Gradient buffer of node `id` for in-place accumulation, or nullptr when
  // the node does not require grad.
  Matrix* grad_target(int id);

  // Seeds d(loss)/d(loss) = 1 and propagates. Parameter gradients are added
  // into `grads` when given, and grad() of a parameter node then reads the
  // shared buffer. Loss must be 1x1.
  void backward(Var loss, Gradients* grads = nullptr);
  // Zero tensor when nothing flowed into `v`.
  Tensor grad(Var v) const;

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    const Tensor* external = nullptr;
    Tensor grad;
    Tensor* sunk = nullptr;  // parameter gradient living in a Gradients buffer
    bool has_grad = false;
    bool requires_grad = false;
    std::ptrdiff_t param = -1;
    BackwardFn backward;
  };

  Var push(Node node);
  Tensor* grad_buffer(int id);

  std::deque<Node> nodes_;
  bool grad_enabled_;
  Gradients* sink_ = nullptr;
};

}  // namespace kgsumm::ad
