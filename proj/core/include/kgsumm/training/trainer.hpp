#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kgsumm/training/checkpoint.hpp"
#include "kgsumm/training/evaluate.hpp"

namespace kgsumm::training {

// Loss components of one step. Selector: sentence, entity, relatedness.
// Generator: nll, coverage, unused. RL: supervised, rl, mean reward.
struct StepLosses {
  double total = 0.0;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double grad_norm = 0.0;
};

struct MetricRow {
  std::size_t step = 0;
  Phase phase = Phase::Selector;
  StepLosses losses;
  std::optional<EvalReport> dev;
};

// "step,phase,loss,loss_a,loss_b,loss_c,grad_norm,dev_loss,dev_sentence_p,dev_entity_p,dev_rouge1"
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricRow& row);

struct TrainResult {
  std::vector<MetricRow> rows;
  std::size_t steps = 0;
  bool early_stopped = false;
  std::optional<double> best_dev;
  std::vector<std::string> episode_log;    // RL phase only
  std::size_t frozen_violations = 0;       // RL steps with nonzero generator gradient
};

struct TrainOptions {
  // When set: checkpoint.bin, metrics.csv and (RL) episodes.tsv are written here.
  std::optional<std::filesystem::path> out_dir;
  bool log_progress = false;
};

class Trainer {
 public:
  Trainer(Model& model, TrainState& state, const corpus::CooccurrenceTable& cooc);

  // Trains one phase on the Train split, evaluating on Dev. Throws ConfigError
  // when the phase's upstream training has not been done.
  TrainResult train(Phase phase, const std::vector<corpus::AnnotatedDocument>& corpus,
                    const TrainOptions& options = {});

  // One optimizer step over `batch` (documents are reduced in id order).
  StepLosses step(Phase phase, const std::vector<const PreparedDocument*>& batch,
                  std::size_t* frozen_violations = nullptr);
  // Episode lines produced by RL steps since the last call.
  std::vector<std::string> take_episode_lines();

  // Gradient of the phase loss summed over `batch`, without updating.
  StepLosses accumulate(Phase phase, const std::vector<const PreparedDocument*>& batch,
                        ad::Gradients& grads, std::size_t* frozen_violations = nullptr);

  void reset_optimizer();

 private:
  struct DocumentResult {
    StepLosses losses;
    std::string episode_line;
    bool frozen_ok = true;
  };
  DocumentResult document_gradient(Phase phase, const PreparedDocument& doc,
                                   ad::Gradients& grads, std::uint64_t step);
  std::vector<ad::ParamId> phase_ids(Phase phase) const;

  Model& model_;
  TrainState& state_;
  const corpus::CooccurrenceTable& cooc_;
  std::optional<ad::Gradients> grads_;
  std::optional<Phase> grads_phase_;
  std::vector<ad::Gradients> slots_;
  std::vector<std::string> episode_lines_;
};

// Selection used as generator training input: oracle-labelled sentences and
// entities, falling back to the selector's top-k when no sentence is labelled.
selector::Selection generator_training_selection(const Model& model, const PreparedDocument& doc);

}  // namespace kgsumm::training
