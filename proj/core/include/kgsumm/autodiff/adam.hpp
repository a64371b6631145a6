#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kgsumm/autodiff/parameter.hpp"

namespace kgsumm::ad {

struct AdamConfig {
  Scalar lr = 1e-3;
  Scalar beta1 = 0.9;
  Scalar beta2 = 0.999;
  Scalar eps = 1e-8;
};

// First and second moments, shaped like the parameters they track.
struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::int64_t step = 0;

  AdamState() = default;
  explicit AdamState(const ParameterStore& store);
};

// One bias-corrected Adam update of the parameters listed in `ids`
// (all parameters when `ids` is empty). Increments state.step by one.
void adam_step(ParameterStore& params, const Gradients& grads, AdamState& state,
               const AdamConfig& config, std::span<const ParamId> ids = {});

}  // namespace kgsumm::ad
