#include "kgsumm/training/model.hpp"

#include "kgsumm/corpus/oracle.hpp"
#include "kgsumm/errors.hpp"
#include "kgsumm/util/log.hpp"

namespace kgsumm::training {

std::unique_ptr<Model> Model::create(const TrainConfig& config,
                                     const std::vector<corpus::AnnotatedDocument>& docs,
                                     const corpus::EmbeddingTable* word_embeddings,
                                     const corpus::EmbeddingTable* entity_embeddings) {
  config.validate();
  corpus::Vocab vocab = corpus::Vocab::build(docs, config.vocab_size);
  corpus::EntityVocab entity_vocab = corpus::EntityVocab::build(
      docs, corpus::EntityVocab::kDefaultMaxSize,
      entity_embeddings != nullptr ? &entity_embeddings->vectors : nullptr);
  return with_vocabularies(config, std::move(vocab), std::move(entity_vocab), word_embeddings,
                           entity_embeddings);
}

std::unique_ptr<Model> Model::with_vocabularies(const TrainConfig& config, corpus::Vocab vocab,
                                                corpus::EntityVocab entity_vocab,
                                                const corpus::EmbeddingTable* word_embeddings,
                                                const corpus::EmbeddingTable* entity_embeddings) {
  config.validate();
  std::unique_ptr<Model> m(new Model());
  m->config = config;
  m->vocab = std::move(vocab);
  m->entity_vocab = std::move(entity_vocab);
  std::mt19937_64 rng(config.seed);
  const auto wd = static_cast<std::size_t>(config.word_dim);
  ad::Tensor sel_words = corpus::word_embedding_matrix(word_embeddings, m->vocab, wd, rng);
  ad::Tensor gen_words = corpus::word_embedding_matrix(word_embeddings, m->vocab, wd, rng);
  ad::Tensor entities = corpus::entity_embedding_matrix(
      entity_embeddings, m->entity_vocab, static_cast<std::size_t>(config.entity_dim), rng);
  m->encoder = encoder::EncoderParams::create(m->params, "selector.encoder", config.encoder(),
                                              std::move(sel_words), std::move(entities), rng);
  m->rhgnn = rhgnn::RhgnnParams::create(m->params, "selector.rhgnn", config.rhgnn(), rng);
  m->selector = selector::SelectorParams::create(m->params, "selector.head", config.selector(), rng);
  m->generator = generator::GeneratorParams::create(m->params, "generator", config.generator(),
                                                    std::move(gen_words), rng);
  return m;
}

PreparedDocument prepare_document(const Model& model, const corpus::AnnotatedDocument& doc,
                                  const corpus::CooccurrenceTable& cooc) {
  PreparedDocument p;
  p.doc = &doc;
  p.input = encoder::prepare_input(doc, model.vocab, model.entity_vocab);
  p.graph = graph::build_graph(doc, cooc, model.config.graph());
  p.propagation = rhgnn::prepare_propagation(rhgnn::dense_adjacency(p.graph),
                                             model.config.rhgnn().mode);
  const auto m = static_cast<ad::Index>(doc.sentences.size());
  const auto n = static_cast<ad::Index>(doc.entities.size());
  p.a_ee = ad::Tensor(n, n);
  for (const auto& e : p.graph.ee) {
    p.a_ee(e.i - m, e.j - m) = e.weight;
    p.a_ee(e.j - m, e.i - m) = e.weight;
  }
  if (doc.oracle_sentence_labels && doc.oracle_entity_labels) {
    p.sentence_labels = *doc.oracle_sentence_labels;
    p.entity_labels = *doc.oracle_entity_labels;
  } else {
    corpus::AnnotatedDocument copy = doc;
    corpus::ensure_oracle_labels(copy);
    p.sentence_labels = *copy.oracle_sentence_labels;
    p.entity_labels = *copy.oracle_entity_labels;
  }
  return p;
}

SelectorPass selector_forward(ad::Binder& bind, const Model& model, const PreparedDocument& doc) {
  SelectorPass pass;
  pass.sentences = encoder::encode_sentences(bind, model.encoder, doc.input);
  pass.entities = encoder::encode_entities(bind, model.encoder, doc.input);
  const ad::Var parts[] = {pass.sentences.s0, pass.entities.e0};
  ad::Var x0 = ad::concat_rows(parts);
  pass.nodes = rhgnn::stack_forward(bind, model.rhgnn, x0, doc.propagation,
                                    pass.sentences.s0.rows());
  pass.output = selector::select_forward(bind, model.selector, pass.nodes.sentences,
                                         pass.nodes.entities, pass.entities.e_e);
  return pass;
}

selector::SelectorLoss selector_document_loss(const Model& model, const PreparedDocument& doc,
                                              const SelectorPass& pass) {
  return selector::selector_loss(pass.output, doc.sentence_labels, doc.entity_labels, doc.a_ee,
                                 model.selector.config);
}

selector::Selection select_document(const Model& model, const PreparedDocument& doc,
                                    selector::SelectorOutput* output) {
  ad::Tape tape(false);
  ad::Binder bind(tape, model.params);
  SelectorPass pass = selector_forward(bind, model, doc);
  selector::Selection sel =
      selector::rank_and_select(pass.output, model.config.k_sentences, model.config.k_entities);
  if (output != nullptr) {
    output->p_sentence = pass.output.p_sentence;
    output->p_entity = pass.output.p_entity;
    output->r_relatedness = pass.output.r_relatedness;
  }
  return sel;
}

std::vector<std::vector<ad::Index>> entity_mentions(const PreparedDocument& doc,
                                                    const std::vector<std::size_t>& entities) {
  std::vector<std::vector<ad::Index>> out;
  out.reserve(entities.size());
  for (std::size_t j : entities) out.push_back(doc.input.mentions.at(j));
  return out;
}

generator::Generation abstract_document(const Model& model, const PreparedDocument& doc,
                                        const selector::Selection& selection) {
  const corpus::Tokens source = generator::build_source(*doc.doc, selection.sentences,
                                                        model.config.max_input_tokens);
  if (source.empty()) {
    log::warn("document " + doc.doc->id + ": selected sentences are empty; no abstract");
    return {};
  }
  generator::DecodeOptions options;
  options.beam = model.config.beam;
  return generator::generate(model.params, model.generator, source,
                             entity_mentions(doc, selection.entities), model.vocab, options);
}

}  // namespace kgsumm::training
