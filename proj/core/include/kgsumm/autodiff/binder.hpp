#pragma once

#include <unordered_map>

#include "kgsumm/autodiff/tape.hpp"

namespace kgsumm::ad {

// Puts each parameter on a tape at most once per forward pass.
class Binder {
 public:
  Binder(Tape& tape, const ParameterStore& store) : tape_(tape), store_(store) {}

  Var operator()(ParamId id) {
    auto it = cache_.find(id);
    if (it != cache_.end()) return it->second;
    Var v = tape_.param(store_, id);
    cache_.emplace(id, v);
    return v;
  }

  Tape& tape() { return tape_; }
  const ParameterStore& store() const { return store_; }

 private:
  Tape& tape_;
  const ParameterStore& store_;
  std::unordered_map<ParamId, Var> cache_;
};

}  // namespace kgsumm::ad
