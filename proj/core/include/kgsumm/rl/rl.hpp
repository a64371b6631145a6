#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgsumm/selector/selector.hpp"

namespace kgsumm::rl {

using ad::Tensor;
using ad::Var;

enum class Baseline {
  None,    // loss scaled by the raw reward
  Greedy,  // loss scaled by reward minus the greedy-selection reward
};

std::string to_string(Baseline b);
Baseline baseline_from_string(std::string_view name);

struct RlConfig {
  double lambda_rl = 0.6;
  std::size_t k_sentences = 4;
  std::size_t k_entities = 4;
  Baseline baseline = Baseline::None;
};

// Draws k indices without replacement, each draw proportional to the
// remaining mass. Returns the draws in order; when k exceeds the number of
// nonzero entries the whole support is returned.
std::vector<std::size_t> sample_without_replacement(std::span<const double> probs, std::size_t k,
                                                    std::mt19937_64& rng);

struct RlSample {
  std::vector<std::size_t> sentences;  // ascending
  std::vector<std::size_t> entities;   // ascending
  Tensor target_sentence;              // M x 1, uniform over sampled sentences
  Tensor target_entity;                // N x 1
  double reward = 0.0;
};

RlSample sample_actions(const selector::SelectorOutput& out, const RlConfig& config,
                        std::mt19937_64& rng);

// Builds the uniform targets for a fixed selection.
RlSample make_sample(std::vector<std::size_t> sentences, std::vector<std::size_t> entities,
                     std::size_t m, std::size_t n);

// reward * (CE(target_S, p_S) + lambda_E * CE(target_E, p_E)).
Var rl_loss(const RlSample& sample, const selector::SelectorOutput& out, double reward,
            double lambda_entity);

// base + lambda_rl * rl
Var combined_selector_loss(Var base, Var rl, double lambda_rl);

// Per-stream seed for one document's episodes.
std::uint64_t episode_seed(std::uint64_t seed, std::string_view doc_id);

// doc id, sampled sentences, sampled entities, reward, loss components; tab separated.
std::string episode_log_line(std::string_view doc_id, const RlSample& sample, double base_loss,
                             double rl_loss, double total);

}  // namespace kgsumm::rl
