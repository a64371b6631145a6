#pragma once

#include <memory>
#include <vector>

#include "kgsumm/corpus/cooccurrence.hpp"
#include "kgsumm/corpus/embeddings.hpp"
#include "kgsumm/training/config.hpp"

namespace kgsumm::training {

// All trainable state. Selector parameters are named "selector.*", generator
// parameters "generator.*"; the two share nothing.
class Model {
 public:
  TrainConfig config;
  corpus::Vocab vocab;
  corpus::EntityVocab entity_vocab;
  ad::ParameterStore params;
  encoder::EncoderParams encoder;
  rhgnn::RhgnnParams rhgnn;
  selector::SelectorParams selector;
  generator::GeneratorParams generator;

  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  // Vocabularies are built from `docs`; optional embedding tables seed the
  // word and entity-level matrices.
  static std::unique_ptr<Model> create(const TrainConfig& config,
                                       const std::vector<corpus::AnnotatedDocument>& docs,
                                       const corpus::EmbeddingTable* word_embeddings = nullptr,
                                       const corpus::EmbeddingTable* entity_embeddings = nullptr);
  // Fresh parameters over fixed vocabularies.
  static std::unique_ptr<Model> with_vocabularies(const TrainConfig& config, corpus::Vocab vocab,
                                                  corpus::EntityVocab entity_vocab,
                                                  const corpus::EmbeddingTable* word_embeddings,
                                                  const corpus::EmbeddingTable* entity_embeddings);

  std::vector<ad::ParamId> selector_ids() const { return params.ids_with_prefix("selector."); }
  std::vector<ad::ParamId> generator_ids() const { return params.ids_with_prefix("generator."); }

 private:
  Model() = default;
};

// Everything about one document that does not depend on parameters.
struct PreparedDocument {
  const corpus::AnnotatedDocument* doc = nullptr;
  encoder::DocumentInput input;
  graph::SentenceEntityGraph graph;
  rhgnn::Propagation propagation;
  ad::Tensor a_ee;  // N x N entity block of the EE adjacency
  std::vector<int> sentence_labels;
  std::vector<int> entity_labels;
};

// Computes oracle labels when the document carries none.
PreparedDocument prepare_document(const Model& model, const corpus::AnnotatedDocument& doc,
                                  const corpus::CooccurrenceTable& cooc);

struct SelectorPass {
  encoder::SentenceNodeInit sentences;
  encoder::EntityNodeInit entities;
  rhgnn::StackOutput nodes;
  selector::SelectorOutput output;
};

SelectorPass selector_forward(ad::Binder& bind, const Model& model, const PreparedDocument& doc);

// Selector loss of one document with the configured weights.
selector::SelectorLoss selector_document_loss(const Model& model, const PreparedDocument& doc,
                                              const SelectorPass& pass);

// Selector forward without gradients; returns the top-k selection.
selector::Selection select_document(const Model& model, const PreparedDocument& doc,
                                    selector::SelectorOutput* output = nullptr);

// Mention id sequences of the given entities, for the generator.
std::vector<std::vector<ad::Index>> entity_mentions(const PreparedDocument& doc,
                                                    const std::vector<std::size_t>& entities);

// Generator decode on a selection.
generator::Generation abstract_document(const Model& model, const PreparedDocument& doc,
                                        const selector::Selection& selection);

}  // namespace kgsumm::training
