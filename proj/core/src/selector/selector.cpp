#include "kgsumm/selector/selector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kgsumm/errors.hpp"
#include "kgsumm/util/log.hpp"

namespace kgsumm::selector {

Mlp Mlp::create(ad::ParameterStore& store, const std::string& prefix, Index in, Index hidden,
                std::mt19937_64& rng) {
  Mlp m;
  m.w1 = store.add_xavier(prefix + ".w1", hidden, in, rng);
  m.b1 = store.add_zeros(prefix + ".b1", 1, hidden);
  m.w2 = store.add_xavier(prefix + ".w2", 1, hidden, rng);
  m.b2 = store.add_zeros(prefix + ".b2", 1, 1);
  return m;
}

Var Mlp::forward(ad::Binder& bind, Var x) const {
  Var h = ad::relu(ad::add(ad::matmul_nt(x, bind(w1)), bind(b1)));
  return ad::add(ad::matmul_nt(h, bind(w2)), bind(b2));
}

SelectorParams SelectorParams::create(ad::ParameterStore& store, const std::string& prefix,
                                      const SelectorConfig& config, std::mt19937_64& rng) {
  if (config.lambda_entity < 0.0 || config.lambda_relatedness < 0.0) {
    throw ConfigError("selector loss weights must be nonnegative");
  }
  SelectorParams p;
  p.config = config;
  p.sentence = Mlp::create(store, prefix + ".sentence_mlp", config.dim, config.hidden, rng);
  p.entity = Mlp::create(store, prefix + ".entity_mlp", config.dim, config.hidden, rng);
  return p;
}

Tensor relatedness_mask(Index n) {
  Tensor m = Tensor::full(n, n, 1.0);
  if (n >= 2) {
    for (Index i = 0; i < n; ++i) m(i, i) = 0.0;
  }
  return m;
}

SelectorOutput select_forward(ad::Binder& bind, const SelectorParams& params, Var sentences,
                              Var entities, Var entity_level) {
  if (sentences.rows() == 0) throw ValidationError("selector needs at least one sentence");
  SelectorOutput out;
  out.sentence_logp = ad::log_softmax(params.sentence.forward(bind, sentences), ad::Axis::Col);
  out.p_sentence = Tensor(out.sentence_logp.value().mat().array().exp().matrix().eval());
  const Index n = entities.rows();
  if (n == 0) {
    out.entity_logp = bind.tape().constant(Tensor(0, 1));
    out.p_entity = Tensor(0, 1);
    return out;
  }
  out.entity_logp = ad::log_softmax(params.entity.forward(bind, entities), ad::Axis::Col);
  out.p_entity = Tensor(out.entity_logp.value().mat().array().exp().matrix().eval());
  if (entity_level.valid()) {
    if (entity_level.rows() != n) {
      throw DimensionError("entity-level rows " + entity_level.shape().str() + " for " +
                           std::to_string(n) + " entities");
    }
    const Tensor mask = relatedness_mask(n);
    out.relatedness_logp =
        ad::log_softmax(ad::matmul_nt(entity_level, entity_level), ad::Axis::Global, &mask);
    // Vectorised exp(-inf) is a denormal, not 0; the mask restores exact zeros.
    out.r_relatedness = Tensor(
        (out.relatedness_logp.value().mat().array().exp() * mask.mat().array()).matrix().eval());
  }
  return out;
}

Tensor label_distribution(std::span<const int> labels) {
  Tensor t(static_cast<Index>(labels.size()), 1);
  const double total = std::accumulate(labels.begin(), labels.end(), 0.0);
  if (total <= 0.0) return t;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    t(static_cast<Index>(i), 0) = labels[i] / total;
  }
  return t;
}

Tensor relatedness_target(const Tensor& a_ee) {
  Tensor t = a_ee;
  for (Index i = 0; i < std::min(t.rows(), t.cols()); ++i) t(i, i) = 0.0;
  const double total = t.sum();
  if (total > 0.0) t.mat() /= total;
  return t;
}

SelectorLoss selector_loss(const SelectorOutput& out, std::span<const int> sentence_labels,
                           std::span<const int> entity_labels, const Tensor& a_ee,
                           const SelectorConfig& config) {
  const Index m = out.sentence_logp.rows();
  const Index n = out.entity_logp.rows();
  if (static_cast<Index>(sentence_labels.size()) != m) {
    throw DimensionError("sentence labels: " + std::to_string(sentence_labels.size()) +
                         " for " + std::to_string(m) + " sentences");
  }
  if (static_cast<Index>(entity_labels.size()) != n) {
    throw DimensionError("entity labels: " + std::to_string(entity_labels.size()) + " for " +
                         std::to_string(n) + " entities");
  }
  ad::Tape& tape = out.sentence_logp.tape();
  SelectorLoss loss;

  const Tensor ts = label_distribution(sentence_labels);
  Var total;
  if (ts.sum() > 0.0) {
    total = ad::cross_entropy(ts, out.sentence_logp);
  } else {
    log::warn("all sentence labels are zero; sentence loss set to 0");
    total = tape.constant(Tensor(1, 1));
  }
  loss.sentence = total.value()(0, 0);

  if (n > 0) {
    const Tensor te = label_distribution(entity_labels);
    if (te.sum() > 0.0) {
      Var le = ad::cross_entropy(te, out.entity_logp);
      loss.entity = le.value()(0, 0);
      total = ad::add(total, ad::scale(le, config.lambda_entity));
    }
    if (out.has_relatedness()) {
      if (a_ee.rows() != n || a_ee.cols() != n) {
        throw DimensionError("EE adjacency " + a_ee.shape().str() + " for " + std::to_string(n) +
                             " entities");
      }
      const Tensor tr = relatedness_target(a_ee);
      if (tr.sum() > 0.0) {
        Var lr = ad::cross_entropy(tr, out.relatedness_logp);
        loss.relatedness = lr.value()(0, 0);
        total = ad::add(total, ad::scale(lr, config.lambda_relatedness));
      }
    }
  }
  loss.total = total;
  return loss;
}

std::vector<std::size_t> top_k(std::span<const double> probs, std::size_t k) {
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
  order.resize(std::min(k, order.size()));
  std::sort(order.begin(), order.end());
  return order;
}

Selection rank_and_select(const SelectorOutput& out, std::size_t k_sentences,
                          std::size_t k_entities) {
  return {top_k(out.p_sentence.flat(), k_sentences), top_k(out.p_entity.flat(), k_entities)};
}

}  // namespace kgsumm::selector
