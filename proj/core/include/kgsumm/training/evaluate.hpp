#pragma once

#include <string>
#include <vector>

#include "kgsumm/rouge/rouge.hpp"
#include "kgsumm/training/model.hpp"

namespace kgsumm::training {

enum class EvalMode { Extractive, Abstractive };
std::string to_string(EvalMode m);
EvalMode eval_mode_from_string(std::string_view name);

struct DocumentEval {
  std::string id;
  std::vector<std::size_t> sentences;
  std::vector<std::size_t> entities;
  double sentence_precision = 0.0;  // |top-k ∩ oracle| / k
  double entity_precision = 0.0;
  double selector_loss = 0.0;       // oracle-label cross entropy
  // R-1, R-2, R-L values under the configured protocol (F1 or limited recall).
  double rouge1 = 0.0, rouge2 = 0.0, rougel = 0.0;
  corpus::Tokens output;
};

struct EvalReport {
  EvalMode mode = EvalMode::Extractive;
  std::string protocol;
  std::vector<DocumentEval> documents;
  double sentence_precision = 0.0;
  double entity_precision = 0.0;
  double selector_loss = 0.0;
  double rouge1 = 0.0, rouge2 = 0.0, rougel = 0.0;

  std::string to_json() const;
};

// Fraction of `selected` whose label is 1, over max(1, selected.size()).
double precision_at_k(const std::vector<std::size_t>& selected, const std::vector<int>& labels);

// ROUGE triple for one output under a protocol: "full_f1" or "limited_recall"
// (candidate cut to the reference length, recall reported).
void score_output(const corpus::Tokens& candidate, const corpus::Tokens& reference,
                  const std::string& protocol, double& r1, double& r2, double& rl);

EvalReport evaluate(const Model& model, const std::vector<PreparedDocument>& docs,
                    EvalMode mode, std::size_t threads = 1);

}  // namespace kgsumm::training
