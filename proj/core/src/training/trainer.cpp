#include "kgsumm/training/trainer.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "kgsumm/errors.hpp"
#include "kgsumm/util/log.hpp"
#include "kgsumm/util/parallel.hpp"

namespace kgsumm::training {

std::string metrics_csv_header() {
  return "step,phase,loss,loss_a,loss_b,loss_c,grad_norm,dev_loss,dev_sentence_p,dev_entity_p,"
         "dev_rouge1";
}

std::string metrics_csv_row(const MetricRow& row) {
  std::ostringstream os;
  os.precision(10);
  os << row.step << ',' << to_string(row.phase) << ',' << row.losses.total << ','
     << row.losses.a << ',' << row.losses.b << ',' << row.losses.c << ','
     << row.losses.grad_norm << ',';
  if (row.dev) {
    os << row.dev->selector_loss << ',' << row.dev->sentence_precision << ','
       << row.dev->entity_precision << ',' << row.dev->rouge1;
  } else {
    os << ",,,";
  }
  return os.str();
}

selector::Selection generator_training_selection(const Model& model, const PreparedDocument& doc) {
  selector::Selection sel;
  for (std::size_t i = 0; i < doc.sentence_labels.size(); ++i) {
    if (doc.sentence_labels[i] == 1) sel.sentences.push_back(i);
  }
  for (std::size_t j = 0; j < doc.entity_labels.size(); ++j) {
    if (doc.entity_labels[j] == 1) sel.entities.push_back(j);
  }
  if (sel.sentences.empty()) return select_document(model, doc);
  return sel;
}

Trainer::Trainer(Model& model, TrainState& state, const corpus::CooccurrenceTable& cooc)
    : model_(model), state_(state), cooc_(cooc) {
  if (state_.adam.m.size() != model_.params.size()) reset_optimizer();
}

void Trainer::reset_optimizer() { state_.adam = ad::AdamState(model_.params); }

std::vector<ad::ParamId> Trainer::phase_ids(Phase phase) const {
  return phase == Phase::Generator ? model_.generator_ids() : model_.selector_ids();
}

namespace {

double reward_of(const corpus::Tokens& output, const PreparedDocument& doc) {
  return rouge::rouge_n(output, rouge::flatten(doc.doc->summary), 1).f1;
}

}  // namespace

Trainer::DocumentResult Trainer::document_gradient(Phase phase, const PreparedDocument& doc,
                                                   ad::Gradients& grads, std::uint64_t step) {
  DocumentResult r;
  StepLosses& out = r.losses;
  ad::Tape tape;
  ad::Binder bind(tape, model_.params);
  switch (phase) {
    case Phase::Selector: {
      SelectorPass pass = selector_forward(bind, model_, doc);
      selector::SelectorLoss loss = selector_document_loss(model_, doc, pass);
      tape.backward(loss.total, &grads);
      out = {loss.total.value()(0, 0), loss.sentence, loss.entity, loss.relatedness, 0.0};
      break;
    }
    case Phase::Generator: {
      const selector::Selection sel = generator_training_selection(model_, doc);
      const corpus::Tokens source =
          generator::build_source(*doc.doc, sel.sentences, model_.config.max_input_tokens);
      if (source.empty()) break;
      generator::EncodedSource src =
          generator::encode_input(bind, model_.generator, source, model_.vocab);
      generator::attach_entities(bind, model_.generator, src, entity_mentions(doc, sel.entities));
      const auto targets = generator::target_sequence(doc.doc->summary, src.ext, model_.vocab,
                                                      model_.config.max_decode_steps);
      generator::GeneratorLoss loss = generator::generator_loss(
          bind, model_.generator, src, targets, model_.config.lambda_coverage);
      tape.backward(loss.total, &grads);
      out = {loss.total.value()(0, 0), loss.nll, loss.coverage, 0.0, 0.0};
      break;
    }
    case Phase::Rl: {
      const rl::RlConfig rc = model_.config.rl();
      SelectorPass pass = selector_forward(bind, model_, doc);
      std::mt19937_64 rng(rl::episode_seed(model_.config.seed ^ (step * 0x9E3779B97F4A7C15ULL),
                                           doc.doc->id));
      rl::RlSample sample = rl::sample_actions(pass.output, rc, rng);
      const selector::Selection sampled{sample.sentences, sample.entities};
      sample.reward = reward_of(abstract_document(model_, doc, sampled).tokens, doc);
      double advantage = sample.reward;
      if (rc.baseline == rl::Baseline::Greedy) {
        const selector::Selection greedy =
            selector::rank_and_select(pass.output, rc.k_sentences, rc.k_entities);
        advantage -= reward_of(abstract_document(model_, doc, greedy).tokens, doc);
      }
      selector::SelectorLoss base = selector_document_loss(model_, doc, pass);
      ad::Var lrl =
          rl::rl_loss(sample, pass.output, advantage, model_.selector.config.lambda_entity);
      ad::Var total = rl::combined_selector_loss(base.total, lrl, rc.lambda_rl);
      tape.backward(total, &grads);
      out = {total.value()(0, 0), base.total.value()(0, 0), lrl.value()(0, 0), sample.reward,
             0.0};
      r.frozen_ok = grads.all_zero(model_.generator_ids());
      r.episode_line = rl::episode_log_line(doc.doc->id, sample, out.a, out.b, out.total);
      break;
    }
  }
  return r;
}

StepLosses Trainer::accumulate(Phase phase, const std::vector<const PreparedDocument*>& batch,
                               ad::Gradients& grads, std::size_t* frozen_violations) {
  std::vector<const PreparedDocument*> order = batch;
  std::stable_sort(order.begin(), order.end(),
                   [](const PreparedDocument* a, const PreparedDocument* b) {
                     return a->doc->id < b->doc->id;
                   });
  const std::size_t threads = std::min(model_.config.worker_threads(), order.size());
  std::vector<DocumentResult> results(order.size());
  if (threads <= 1) {
    // Sums are reproducible for a fixed thread count; different thread
    // counts agree up to rounding.
    for (std::size_t i = 0; i < order.size(); ++i) {
      results[i] = document_gradient(phase, *order[i], grads, state_.step);
    }
  } else {
    while (slots_.size() < threads) slots_.emplace_back(model_.params);
    for (std::size_t begin = 0; begin < order.size(); begin += threads) {
      const std::size_t count = std::min(threads, order.size() - begin);
      util::parallel_for(count, count, [&](std::size_t t) {
        slots_[t].zero();
        results[begin + t] = document_gradient(phase, *order[begin + t], slots_[t], state_.step);
      });
      for (std::size_t t = 0; t < count; ++t) grads.add(slots_[t]);
    }
  }
  StepLosses mean;
  const double inv = order.empty() ? 0.0 : 1.0 / static_cast<double>(order.size());
  for (const auto& r : results) {
    mean.total += r.losses.total * inv;
    mean.a += r.losses.a * inv;
    mean.b += r.losses.b * inv;
    mean.c += r.losses.c * inv;
    if (!r.frozen_ok && frozen_violations != nullptr) ++*frozen_violations;
    if (!r.episode_line.empty()) episode_lines_.push_back(r.episode_line);
  }
  return mean;
}

StepLosses Trainer::step(Phase phase, const std::vector<const PreparedDocument*>& batch,
                         std::size_t* frozen_violations) {
  if (batch.empty()) throw ValidationError("training step needs at least one document");
  const auto ids = phase_ids(phase);
  if (!grads_) grads_.emplace(model_.params);
  if (grads_phase_ != phase) {
    grads_->zero();
    grads_phase_ = phase;
  }
  // Only the trained phase's entries can become nonzero; the rest stay zero.
  grads_->zero(ids);
  StepLosses losses = accumulate(phase, batch, *grads_, frozen_violations);
  grads_->scale(1.0 / static_cast<double>(batch.size()), ids);
  losses.grad_norm = grads_->clip_global_norm(model_.config.clip_norm, ids);
  ad::AdamConfig adam;
  adam.lr = model_.config.learning_rate;
  ad::adam_step(model_.params, *grads_, state_.adam, adam, ids);
  ++state_.step;
  return losses;
}

std::vector<std::string> Trainer::take_episode_lines() {
  std::vector<std::string> out;
  out.swap(episode_lines_);
  return out;
}

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(what);
}

std::vector<ad::Tensor> snapshot(const ad::ParameterStore& store,
                                 const std::vector<ad::ParamId>& ids) {
  std::vector<ad::Tensor> out;
  for (auto id : ids) out.push_back(store[id].value);
  return out;
}

void restore(ad::ParameterStore& store, const std::vector<ad::ParamId>& ids,
             const std::vector<ad::Tensor>& values) {
  for (std::size_t i = 0; i < ids.size(); ++i) store[ids[i]].value = values[i];
}

}  // namespace

TrainResult Trainer::train(Phase phase, const std::vector<corpus::AnnotatedDocument>& corpus,
                           const TrainOptions& options) {
  const TrainConfig& cfg = model_.config;
  if (phase == Phase::Generator) {
    require(state_.phases & kSelectorDone,
            "generator training needs a checkpoint with a trained selector");
  }
  if (phase == Phase::Rl) {
    require((state_.phases & kSelectorDone) && (state_.phases & kGeneratorDone),
            "RL training needs a checkpoint with a trained selector and generator");
  }
  std::vector<PreparedDocument> train_docs;
  std::vector<PreparedDocument> dev_docs;
  for (const auto& d : corpus) {
    if (d.split == corpus::Split::Train) train_docs.push_back(prepare_document(model_, d, cooc_));
    if (d.split == corpus::Split::Dev) dev_docs.push_back(prepare_document(model_, d, cooc_));
  }
  if (cfg.max_steps > 0 && train_docs.empty()) {
    throw ValidationError("corpus has no training documents");
  }
  reset_optimizer();
  episode_lines_.clear();

  TrainResult result;
  const auto ids = phase_ids(phase);
  std::optional<std::vector<ad::Tensor>> best;
  std::size_t bad_evals = 0;
  const bool lower_is_better = phase == Phase::Selector;

  std::vector<std::size_t> order(train_docs.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();
  for (std::size_t s = 1; s <= cfg.max_steps; ++s) {
    std::vector<const PreparedDocument*> batch;
    while (batch.size() < std::min(cfg.batch_size, train_docs.size())) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), state_.rng);
        cursor = 0;
      }
      batch.push_back(&train_docs[order[cursor++]]);
    }
    MetricRow row;
    row.step = s;
    row.phase = phase;
    row.losses = step(phase, batch, &result.frozen_violations);
    result.steps = s;
    if (s % cfg.eval_interval == 0 && !dev_docs.empty()) {
      row.dev = evaluate(model_, dev_docs,
                         phase == Phase::Selector ? EvalMode::Extractive : EvalMode::Abstractive,
                         cfg.worker_threads());
      const double metric = lower_is_better ? row.dev->selector_loss : row.dev->rouge1;
      const bool improved = !result.best_dev || (lower_is_better ? metric < *result.best_dev
                                                                 : metric > *result.best_dev);
      if (improved) {
        result.best_dev = metric;
        best = snapshot(model_.params, ids);
        bad_evals = 0;
      } else {
        ++bad_evals;
      }
      if (options.log_progress) {
        log::info(to_string(phase) + " step " + std::to_string(s) + " loss " +
                  std::to_string(row.losses.total) + " dev " + std::to_string(metric));
      }
    }
    result.rows.push_back(std::move(row));
    if (best && bad_evals >= cfg.patience) {
      result.early_stopped = true;
      break;
    }
  }
  if (best) restore(model_.params, ids, *best);
  state_.phases |= phase == Phase::Selector    ? kSelectorDone
                   : phase == Phase::Generator ? kGeneratorDone
                                               : kRlDone;
  result.episode_log = take_episode_lines();

  if (options.out_dir) {
    std::filesystem::create_directories(*options.out_dir);
    save_checkpoint(*options.out_dir / "checkpoint.bin", model_, state_);
    std::ofstream csv(*options.out_dir / "metrics.csv");
    csv << metrics_csv_header() << '\n';
    for (const auto& r : result.rows) csv << metrics_csv_row(r) << '\n';
    if (!csv) throw IoError("cannot write metrics.csv");
    if (phase == Phase::Rl) {
      std::ofstream ep(*options.out_dir / "episodes.tsv");
      ep << "doc_id\tsentences\tentities\treward\tloss_selector\tloss_rl\tloss_total\n";
      for (const auto& line : result.episode_log) ep << line << '\n';
    }
  }
  return result;
}

}  // namespace kgsumm::training
