#include "kgsumm/autodiff/adam.hpp"

#include <cmath>
#include <numeric>

#include "kgsumm/errors.hpp"

namespace kgsumm::ad {

AdamState::AdamState(const ParameterStore& store) {
  m.reserve(store.size());
  v.reserve(store.size());
  for (const auto& p : store) {
    m.emplace_back(p.value.rows(), p.value.cols());
    v.emplace_back(p.value.rows(), p.value.cols());
  }
}

void adam_step(ParameterStore& params, const Gradients& grads, AdamState& state,
               const AdamConfig& config, std::span<const ParamId> ids) {
  if (grads.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw DimensionError("adam_step: parameter, gradient and moment counts differ (" +
                         std::to_string(params.size()) + ", " + std::to_string(grads.size()) +
                         ", " + std::to_string(state.m.size()) + ")");
  }
  std::vector<ParamId> all;
  if (ids.empty()) {
    all.resize(params.size());
    std::iota(all.begin(), all.end(), ParamId{0});
    ids = all;
  }
  state.step += 1;
  const Scalar t = static_cast<Scalar>(state.step);
  const Scalar bc1 = 1.0 - std::pow(config.beta1, t);
  const Scalar bc2 = 1.0 - std::pow(config.beta2, t);
  const Scalar step_size = config.lr / bc1;
  const Scalar inv_sqrt_bc2 = 1.0 / std::sqrt(bc2);
  for (ParamId id : ids) {
    Matrix& w = params[id].value.mat();
    const Matrix& g = grads[id].mat();
    Matrix& m = state.m[id].mat();
    Matrix& v = state.v[id].mat();
    if (g.rows() != w.rows() || g.cols() != w.cols() || m.rows() != w.rows() ||
        m.cols() != w.cols()) {
      throw DimensionError("adam_step: shape mismatch for parameter " + params[id].name);
    }
    m.array() = config.beta1 * m.array() + (1.0 - config.beta1) * g.array();
    v.array() = config.beta2 * v.array() + (1.0 - config.beta2) * g.array().square();
    w.array() -= step_size * m.array() / (v.array().sqrt() * inv_sqrt_bc2 + config.eps);
  }
}

}  // namespace kgsumm::ad
