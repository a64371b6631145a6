#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kgsumm/autodiff/tensor.hpp"

namespace kgsumm::ad {

using ParamId = std::size_t;

struct Parameter {
  std::string name;
  Tensor value;
};

// Owns every trainable matrix of a model. Parameters are addressed by a stable
// integer id (insertion order) and by name.
class ParameterStore {
 public:
  ParamId add(std::string name, Tensor init);
  ParamId add_uniform(std::string name, Index rows, Index cols, Scalar limit, std::mt19937_64& rng);
  // Glorot-uniform initialisation.
  ParamId add_xavier(std::string name, Index rows, Index cols, std::mt19937_64& rng);
  ParamId add_zeros(std::string name, Index rows, Index cols);

  bool contains(std::string_view name) const;
  ParamId id(std::string_view name) const;

  Parameter& operator[](ParamId id) { return params_.at(id); }
  const Parameter& operator[](ParamId id) const { return params_.at(id); }
  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;

  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  // Ids of all parameters whose name starts with `prefix`.
  std::vector<ParamId> ids_with_prefix(std::string_view prefix) const;

 private:
  std::vector<Parameter> params_;
  std::unordered_map<std::string, ParamId> by_name_;
};

// Dense gradient buffers, one per parameter, shaped like the parameter values.
class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(const ParameterStore& store);

  void zero();
  Tensor& operator[](ParamId id) { return grads_.at(id); }
  const Tensor& operator[](ParamId id) const { return grads_.at(id); }
  std::size_t size() const { return grads_.size(); }

  void accumulate(ParamId id, const Matrix& g);
  void add(const Gradients& other);
  void scale(Scalar s);
  Scalar global_norm() const;
  // Rescales so the global L2 norm is at most `max_norm`; returns the pre-clip norm.
  Scalar clip_global_norm(Scalar max_norm);

  // Same operations restricted to `ids`; other entries are left untouched.
  void zero(std::span<const ParamId> ids);
  void scale(Scalar s, std::span<const ParamId> ids);
  Scalar global_norm(std::span<const ParamId> ids) const;
  Scalar clip_global_norm(Scalar max_norm, std::span<const ParamId> ids);
  bool all_zero(std::span<const ParamId> ids) const;

 private:
  std::vector<Tensor> grads_;
};

}  // namespace kgsumm::ad
