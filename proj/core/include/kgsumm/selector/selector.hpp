#pragma once

#include <random>
#include <span>
#include <string>
#include <vector>

#include "kgsumm/autodiff/binder.hpp"
#include "kgsumm/autodiff/ops.hpp"

namespace kgsumm::selector {

using ad::Index;
using ad::ParamId;
using ad::Tensor;
using ad::Var;

struct SelectorConfig {
  Index dim = 512;
  Index hidden = 256;
  double lambda_entity = 0.42;
  double lambda_relatedness = 0.33;
};

// Two-layer scorer: relu(x W1^T + b1) W2^T + b2, one score per row.
struct Mlp {
  ParamId w1 = 0, b1 = 0, w2 = 0, b2 = 0;

  static Mlp create(ad::ParameterStore& store, const std::string& prefix, Index in, Index hidden,
                    std::mt19937_64& rng);
  Var forward(ad::Binder& bind, Var x) const;
};

struct SelectorParams {
  SelectorConfig config;
  Mlp sentence;
  Mlp entity;

  static SelectorParams create(ad::ParameterStore& store, const std::string& prefix,
                               const SelectorConfig& config, std::mt19937_64& rng);
};

struct SelectorOutput {
  Var sentence_logp;     // M x 1
  Var entity_logp;       // N x 1
  Var relatedness_logp;  // N x N, global; invalid without entity-level rows or N = 0
  Tensor p_sentence;
  Tensor p_entity;
  Tensor r_relatedness;

  bool has_relatedness() const { return relatedness_logp.valid(); }
};

// Diagonal excluded from the pair distribution when N >= 2.
Tensor relatedness_mask(Index n);

// `entity_level` holds the E^E rows of the document's entities; pass an
// invalid Var to skip the relatedness head.
SelectorOutput select_forward(ad::Binder& bind, const SelectorParams& params, Var sentences,
                              Var entities, Var entity_level);

// y / sum(y); all zeros when sum(y) = 0.
Tensor label_distribution(std::span<const int> labels);
// A / sum(A) with the diagonal dropped; all zeros when the sum is 0.
Tensor relatedness_target(const Tensor& a_ee);

struct SelectorLoss {
  Var total;
  double sentence = 0.0;
  double entity = 0.0;
  double relatedness = 0.0;
};

// loss^S + lambda_E loss^E + lambda_EE loss^EE, each a cross entropy against
// the normalised labels. Degenerate targets contribute 0.
SelectorLoss selector_loss(const SelectorOutput& out, std::span<const int> sentence_labels,
                           std::span<const int> entity_labels, const Tensor& a_ee,
                           const SelectorConfig& config);

// Top-k indices by probability, ties to the lower index, returned ascending.
// k is clamped to the number of candidates.
std::vector<std::size_t> top_k(std::span<const double> probs, std::size_t k);

struct Selection {
  std::vector<std::size_t> sentences;
  std::vector<std::size_t> entities;
};

Selection rank_and_select(const SelectorOutput& out, std::size_t k_sentences,
                          std::size_t k_entities);

}  // namespace kgsumm::selector
