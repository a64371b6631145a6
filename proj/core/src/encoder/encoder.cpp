#include "kgsumm/encoder/encoder.hpp"

#include "kgsumm/errors.hpp"

namespace kgsumm::encoder {

corpus::Tokens mention_sequence(const corpus::AnnotatedDocument& doc, const corpus::Entity& e) {
  corpus::Tokens out;
  for (std::size_t k = 0; k < e.mentions.size(); ++k) {
    const auto& m = e.mentions[k];
    if (k > 0) out.emplace_back("<sep>");
    const auto& sent = doc.sentences.at(m.sentence);
    for (std::size_t t = m.start; t < m.end; ++t) out.push_back(sent.at(t));
  }
  return out;
}

DocumentInput prepare_input(const corpus::AnnotatedDocument& doc, const corpus::Vocab& vocab,
                            const corpus::EntityVocab& entity_vocab) {
  DocumentInput in;
  in.sentences.reserve(doc.sentences.size());
  for (const auto& s : doc.sentences) {
    std::vector<Index> ids;
    ids.reserve(s.size());
    for (const auto& tok : s) ids.push_back(vocab.id(tok));
    if (ids.empty()) ids.push_back(corpus::Vocab::kPad);
    in.sentences.push_back(std::move(ids));
  }
  for (const auto& e : doc.entities) {
    std::vector<Index> ids;
    for (const auto& tok : mention_sequence(doc, e)) {
      ids.push_back(tok == "<sep>" ? corpus::Vocab::kSep : vocab.id(tok));
    }
    in.mentions.push_back(std::move(ids));
    in.entity_ids.push_back(entity_vocab.id(e.kg_id));
  }
  return in;
}

EncoderParams EncoderParams::create(ad::ParameterStore& store, const std::string& prefix,
                                    const EncoderConfig& config, ad::Tensor word_table,
                                    ad::Tensor entity_table, std::mt19937_64& rng) {
  if (word_table.cols() != config.word_dim) {
    throw DimensionError("word table has " + std::to_string(word_table.cols()) +
                         " columns, expected " + std::to_string(config.word_dim));
  }
  if (entity_table.cols() != config.entity_dim) {
    throw DimensionError("entity table has " + std::to_string(entity_table.cols()) +
                         " columns, expected " + std::to_string(config.entity_dim));
  }
  if (2 * config.hidden != config.node_dim) {
    throw ConfigError("node_dim must equal twice the encoder hidden size");
  }
  EncoderParams p;
  p.config = config;
  p.word_embedding = store.add(prefix + ".word_embedding", std::move(word_table));
  p.entity_embedding = store.add(prefix + ".entity_embedding", std::move(entity_table));
  p.word_rnn = BiGru::create(store, prefix + ".word_rnn", config.word_dim, config.hidden, rng);
  p.sentence_rnn =
      BiGru::create(store, prefix + ".sentence_rnn", 2 * config.hidden, config.hidden, rng);
  p.mention_rnn =
      BiGru::create(store, prefix + ".mention_rnn", config.word_dim, config.mention_hidden, rng);
  const Index in = 2 * config.mention_hidden + (config.entity_level ? config.entity_dim : 0);
  p.projection = store.add_xavier(prefix + ".entity_projection", config.node_dim, in, rng);
  p.projection_bias = store.add_zeros(prefix + ".entity_projection_bias", 1, config.node_dim);
  return p;
}

SentenceNodeInit encode_sentences(ad::Binder& bind, const EncoderParams& p,
                                  const DocumentInput& input) {
  if (input.sentences.empty()) throw ValidationError("document has no sentences");
  Var reps = encode_mention_set(bind, p.word_rnn, p.word_embedding, input.sentences);
  Var s = run_bigru(bind, p.sentence_rnn, reps).states;
  return {s};
}

Var encode_mentions(ad::Binder& bind, const BiGru& rnn, ParamId word_embedding,
                    const std::vector<Index>& ids) {
  Var x = ad::gather_rows(bind(word_embedding), ids);
  return run_bigru(bind, rnn, x).summary();
}

Var encode_mention_set(ad::Binder& bind, const BiGru& rnn, ParamId word_embedding,
                       const std::vector<std::vector<Index>>& sequences) {
  std::vector<Index> ids;
  std::vector<Index> lengths;
  lengths.reserve(sequences.size());
  for (const auto& seq : sequences) {
    ids.insert(ids.end(), seq.begin(), seq.end());
    lengths.push_back(static_cast<Index>(seq.size()));
  }
  Var x = ad::gather_rows(bind(word_embedding), ids);
  return bigru_summaries(bind, rnn, x, lengths);
}

EntityNodeInit encode_entities(ad::Binder& bind, const EncoderParams& p,
                               const DocumentInput& input) {
  const EncoderConfig& c = p.config;
  ad::Tape& tape = bind.tape();
  EntityNodeInit out;
  if (input.mentions.empty()) {
    out.e0 = tape.constant(ad::Tensor(0, c.node_dim));
    out.e_w = tape.constant(ad::Tensor(0, 2 * c.mention_hidden));
    if (c.entity_level) out.e_e = tape.constant(ad::Tensor(0, c.entity_dim));
    return out;
  }
  out.e_w = encode_mention_set(bind, p.mention_rnn, p.word_embedding, input.mentions);
  Var features = out.e_w;
  if (c.entity_level) {
    out.e_e = ad::gather_rows(bind(p.entity_embedding), input.entity_ids);
    const Var parts[] = {out.e_w, out.e_e};
    features = ad::concat_cols(parts);
  }
  out.e0 = ad::add(ad::matmul_nt(features, bind(p.projection)), bind(p.projection_bias));
  return out;
}

}  // namespace kgsumm::encoder
