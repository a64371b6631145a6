#include "kgsumm/autodiff/tape.hpp"

#include "kgsumm/errors.hpp"

namespace kgsumm::ad {

const Tensor& Var::value() const { return tape_->value(id_); }

bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::leaf(Tensor value) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = grad_enabled_;
  return push(std::move(n));
}

Var Tape::param(const ParameterStore& store, ParamId id) {
  Node n;
  n.external = &store[id].value;
  n.requires_grad = grad_enabled_;
  n.param = static_cast<std::ptrdiff_t>(id);
  return push(std::move(n));
}

Var Tape::record(Tensor value, std::initializer_list<int> parents, BackwardFn fn) {
  Node n;
  n.value = std::move(value);
  if (grad_enabled_) {
    for (int p : parents) n.requires_grad = n.requires_grad || nodes_.at(p).requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(fn);
  return push(std::move(n));
}

Var Tape::record(Tensor value, const std::vector<int>& parents, BackwardFn fn) {
  Node n;
  n.value = std::move(value);
  if (grad_enabled_) {
    for (int p : parents) n.requires_grad = n.requires_grad || nodes_.at(p).requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(fn);
  return push(std::move(n));
}

const Tensor& Tape::value(int id) const {
  const Node& n = nodes_.at(id);
  return n.external != nullptr ? *n.external : n.value;
}

Tensor* Tape::grad_buffer(int id) {
  Node& n = nodes_.at(id);
  if (!n.requires_grad) return nullptr;
  if (!n.has_grad && n.param >= 0 && sink_ != nullptr) {
    n.sunk = &(*sink_)[static_cast<ParamId>(n.param)];
    n.has_grad = true;
  }
  if (n.sunk != nullptr) return n.sunk;
  if (!n.has_grad) {
    const Tensor& v = n.external != nullptr ? *n.external : n.value;
    n.grad = Tensor(v.rows(), v.cols());
    n.has_grad = true;
  }
  return &n.grad;
}

Matrix* Tape::grad_target(int id) {
  Tensor* buf = grad_buffer(id);
  return buf == nullptr ? nullptr : &buf->mat();
}

void Tape::accumulate(int id, const Matrix& g) {
  Tensor* buf = grad_buffer(id);
  if (buf == nullptr) return;
  if (g.rows() != buf->rows() || g.cols() != buf->cols()) {
    throw DimensionError("gradient shape " + Shape{g.rows(), g.cols()}.str() +
                         " does not match value shape " + buf->shape().str());
  }
  buf->mat() += g;
}

void Tape::accumulate_block(int id, Index row, Index col, const Matrix& g) {
  Tensor* buf = grad_buffer(id);
  if (buf == nullptr) return;
  if (row + g.rows() > buf->rows() || col + g.cols() > buf->cols()) {
    throw DimensionError("gradient block " + Shape{g.rows(), g.cols()}.str() + " at (" +
                         std::to_string(row) + "," + std::to_string(col) +
                         ") exceeds value shape " + buf->shape().str());
  }
  buf->mat().block(row, col, g.rows(), g.cols()) += g;
}

void Tape::accumulate_rows(int id, std::span<const Index> rows, const Matrix& g) {
  Tensor* buf = grad_buffer(id);
  if (buf == nullptr) return;
  if (static_cast<Index>(rows.size()) != g.rows() || g.cols() != buf->cols()) {
    throw DimensionError("row gradient " + Shape{g.rows(), g.cols()}.str() +
                         " does not match " + std::to_string(rows.size()) + " rows of " +
                         buf->shape().str());
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    buf->mat().row(rows[i]) += g.row(static_cast<Index>(i));
  }
}

void Tape::backward(Var loss, Gradients* grads) {
  if (&loss.tape() != this) throw Error("backward: loss belongs to a different tape");
  if (loss.shape() != Shape{1, 1}) {
    throw DimensionError("backward expects a 1x1 loss, got " + loss.shape().str());
  }
  if (!nodes_.at(loss.id()).requires_grad) return;
  // Parameter gradients are written straight into `grads`.
  sink_ = grads;
  accumulate(loss.id(), Matrix::Ones(1, 1));
  for (int id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.has_grad || n.sunk != nullptr) continue;
    if (n.backward) n.backward(n.grad.mat(), n.value, *this);
  }
  sink_ = nullptr;
}

Tensor Tape::grad(Var v) const {
  const Node& n = nodes_.at(v.id());
  if (n.sunk != nullptr) return *n.sunk;
  if (n.has_grad) return n.grad;
  return Tensor(v.rows(), v.cols());
}

}  // namespace kgsumm::ad
