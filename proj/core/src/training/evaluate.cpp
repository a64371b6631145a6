#include "kgsumm/training/evaluate.hpp"

#include <json.hpp>

#include "kgsumm/errors.hpp"
#include "kgsumm/util/parallel.hpp"

namespace kgsumm::training {

std::string to_string(EvalMode m) { return m == EvalMode::Abstractive ? "abstractive" : "extractive"; }

EvalMode eval_mode_from_string(std::string_view name) {
  if (name == "extractive") return EvalMode::Extractive;
  if (name == "abstractive") return EvalMode::Abstractive;
  throw ConfigError("unknown evaluation mode: " + std::string(name));
}

double precision_at_k(const std::vector<std::size_t>& selected, const std::vector<int>& labels) {
  if (selected.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i : selected) hits += labels.at(i) == 1 ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(selected.size());
}

void score_output(const corpus::Tokens& candidate, const corpus::Tokens& reference,
                  const std::string& protocol, double& r1, double& r2, double& rl) {
  if (protocol == "limited_recall") {
    const std::size_t limit = std::max<std::size_t>(1, reference.size());
    r1 = rouge::limited_length(candidate, reference, limit, rouge::Variant::Rouge1).recall;
    r2 = rouge::limited_length(candidate, reference, limit, rouge::Variant::Rouge2).recall;
    rl = rouge::limited_length(candidate, reference, limit, rouge::Variant::RougeL).recall;
    return;
  }
  if (protocol != "full_f1") throw ConfigError("unknown ROUGE protocol: " + protocol);
  const rouge::RougeTriple t = rouge::score_all(candidate, reference);
  r1 = t.r1.f1;
  r2 = t.r2.f1;
  rl = t.rl.f1;
}

EvalReport evaluate(const Model& model, const std::vector<PreparedDocument>& docs, EvalMode mode,
                    std::size_t threads) {
  EvalReport report;
  report.mode = mode;
  report.protocol = model.config.rouge_protocol;
  report.documents.resize(docs.size());
  util::parallel_for(docs.size(), threads, [&](std::size_t i) {
    const PreparedDocument& d = docs[i];
    DocumentEval& e = report.documents[i];
    e.id = d.doc->id;
    ad::Tape tape(false);
    ad::Binder bind(tape, model.params);
    SelectorPass pass = selector_forward(bind, model, d);
    selector::Selection sel =
        selector::rank_and_select(pass.output, model.config.k_sentences, model.config.k_entities);
    e.sentences = sel.sentences;
    e.entities = sel.entities;
    e.sentence_precision = precision_at_k(sel.sentences, d.sentence_labels);
    e.entity_precision = precision_at_k(sel.entities, d.entity_labels);
    e.selector_loss = selector_document_loss(model, d, pass).total.value()(0, 0);
    if (mode == EvalMode::Extractive) {
      for (std::size_t s : sel.sentences) {
        const auto& sent = d.doc->sentences[s];
        e.output.insert(e.output.end(), sent.begin(), sent.end());
      }
    } else {
      e.output = abstract_document(model, d, sel).tokens;
    }
    score_output(e.output, rouge::flatten(d.doc->summary), report.protocol, e.rouge1, e.rouge2,
                 e.rougel);
  });
  if (!docs.empty()) {
    const double n = static_cast<double>(docs.size());
    for (const auto& e : report.documents) {
      report.sentence_precision += e.sentence_precision / n;
      report.entity_precision += e.entity_precision / n;
      report.selector_loss += e.selector_loss / n;
      report.rouge1 += e.rouge1 / n;
      report.rouge2 += e.rouge2 / n;
      report.rougel += e.rougel / n;
    }
  }
  return report;
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["mode"] = to_string(mode);
  j["protocol"] = protocol;
  j["documents"] = documents.size();
  j["mean"] = {{"rouge1", rouge1},
               {"rouge2", rouge2},
               {"rougeL", rougel},
               {"sentence_precision_at_k", sentence_precision},
               {"entity_precision_at_k", entity_precision},
               {"selector_loss", selector_loss}};
  auto per = nlohmann::ordered_json::array();
  for (const auto& e : documents) {
    per.push_back({{"id", e.id},
                   {"rouge1", e.rouge1},
                   {"rouge2", e.rouge2},
                   {"rougeL", e.rougel},
                   {"sentence_precision_at_k", e.sentence_precision},
                   {"entity_precision_at_k", e.entity_precision},
                   {"selector_loss", e.selector_loss},
                   {"sentences", e.sentences},
                   {"entities", e.entities}});
  }
  j["per_document"] = per;
  return j.dump(2);
}

}  // namespace kgsumm::training
