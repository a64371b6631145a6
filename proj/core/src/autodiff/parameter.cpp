#include "kgsumm/autodiff/parameter.hpp"

#include <cmath>

#include "kgsumm/errors.hpp"

namespace kgsumm::ad {

ParamId ParameterStore::add(std::string name, Tensor init) {
  if (by_name_.contains(name)) throw ConfigError("duplicate parameter name: " + name);
  const ParamId id = params_.size();
  by_name_.emplace(name, id);
  params_.push_back({std::move(name), std::move(init)});
  return id;
}

ParamId ParameterStore::add_uniform(std::string name, Index rows, Index cols, Scalar limit,
                                    std::mt19937_64& rng) {
  std::uniform_real_distribution<Scalar> dist(-limit, limit);
  Tensor t(rows, cols);
  for (auto& v : t.flat()) v = dist(rng);
  return add(std::move(name), std::move(t));
}

ParamId ParameterStore::add_xavier(std::string name, Index rows, Index cols,
                                   std::mt19937_64& rng) {
  const Scalar limit = std::sqrt(6.0 / static_cast<Scalar>(rows + cols));
  return add_uniform(std::move(name), rows, cols, limit, rng);
}

ParamId ParameterStore::add_zeros(std::string name, Index rows, Index cols) {
  return add(std::move(name), Tensor(rows, cols));
}

bool ParameterStore::contains(std::string_view name) const {
  return by_name_.contains(std::string(name));
}

ParamId ParameterStore::id(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) throw ConfigError("unknown parameter: " + std::string(name));
  return it->second;
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

std::vector<ParamId> ParameterStore::ids_with_prefix(std::string_view prefix) const {
  std::vector<ParamId> out;
  for (ParamId i = 0; i < params_.size(); ++i) {
    if (params_[i].name.starts_with(prefix)) out.push_back(i);
  }
  return out;
}

Gradients::Gradients(const ParameterStore& store) {
  grads_.reserve(store.size());
  for (const auto& p : store) grads_.emplace_back(p.value.rows(), p.value.cols());
}

void Gradients::zero() {
  for (auto& g : grads_) g.mat().setZero();
}

void Gradients::zero(std::span<const ParamId> ids) {
  for (ParamId id : ids) grads_.at(id).mat().setZero();
}

void Gradients::accumulate(ParamId id, const Matrix& g) {
  Tensor& dst = grads_.at(id);
  if (dst.rows() != g.rows() || dst.cols() != g.cols()) {
    throw DimensionError("gradient for parameter " + std::to_string(id) + " has shape " +
                         Shape{g.rows(), g.cols()}.str() + ", expected " + dst.shape().str());
  }
  dst.mat() += g;
}

void Gradients::add(const Gradients& other) {
  if (other.size() != size()) throw DimensionError("gradient sets differ in parameter count");
  for (std::size_t i = 0; i < grads_.size(); ++i) grads_[i].mat() += other.grads_[i].mat();
}

void Gradients::scale(Scalar s) {
  for (auto& g : grads_) g.mat() *= s;
}

void Gradients::scale(Scalar s, std::span<const ParamId> ids) {
  for (ParamId id : ids) grads_.at(id).mat() *= s;
}

Scalar Gradients::global_norm(std::span<const ParamId> ids) const {
  Scalar sq = 0.0;
  for (ParamId id : ids) sq += grads_.at(id).mat().squaredNorm();
  return std::sqrt(sq);
}

Scalar Gradients::clip_global_norm(Scalar max_norm, std::span<const ParamId> ids) {
  const Scalar norm = global_norm(ids);
  if (norm > max_norm && norm > 0.0) scale(max_norm / norm, ids);
  return norm;
}

Scalar Gradients::global_norm() const {
  Scalar sq = 0.0;
  for (const auto& g : grads_) sq += g.mat().squaredNorm();
  return std::sqrt(sq);
}

Scalar Gradients::clip_global_norm(Scalar max_norm) {
  const Scalar norm = global_norm();
  if (norm > max_norm && norm > 0.0) scale(max_norm / norm);
  return norm;
}

bool Gradients::all_zero(std::span<const ParamId> ids) const {
  for (ParamId id : ids) {
    if (!grads_.at(id).mat().isZero(0.0)) return false;
  }
  return true;
}

}  // namespace kgsumm::ad
