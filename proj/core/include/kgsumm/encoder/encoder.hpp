#pragma once

#include <random>
#include <string>
#include <vector>

#include "kgsumm/corpus/document.hpp"
#include "kgsumm/corpus/vocab.hpp"
#include "kgsumm/encoder/gru.hpp"

namespace kgsumm::encoder {

struct EncoderConfig {
  Index word_dim = 128;
  Index entity_dim = 128;
  Index hidden = 256;          // per direction; node dim is 2 * hidden
  Index mention_hidden = 192;  // per direction
  Index node_dim = 512;
  bool entity_level = true;    // false drops e_E from the entity node input
};

// Token ids for one document, prepared once and reused across steps.
struct DocumentInput {
  std::vector<std::vector<Index>> sentences;  // never empty; empty sentence -> {PAD}
  std::vector<std::vector<Index>> mentions;   // per entity, SEP-joined mention tokens
  std::vector<Index> entity_ids;              // entity-level vocabulary rows
};

// Mention tokens of an entity joined by <sep>, in document order.
corpus::Tokens mention_sequence(const corpus::AnnotatedDocument& doc, const corpus::Entity& e);

DocumentInput prepare_input(const corpus::AnnotatedDocument& doc, const corpus::Vocab& vocab,
                            const corpus::EntityVocab& entity_vocab);

struct EncoderParams {
  EncoderConfig config;
  ParamId word_embedding = 0;    // V x word_dim
  ParamId entity_embedding = 0;  // entity vocab x entity_dim (E^E)
  BiGru word_rnn;
  BiGru sentence_rnn;
  BiGru mention_rnn;
  ParamId projection = 0;  // node_dim x (2 * mention_hidden [+ entity_dim])
  ParamId projection_bias = 0;

  // Embedding tables are taken as initial values.
  static EncoderParams create(ad::ParameterStore& store, const std::string& prefix,
                              const EncoderConfig& config, ad::Tensor word_table,
                              ad::Tensor entity_table, std::mt19937_64& rng);
};

struct SentenceNodeInit {
  Var s0;  // M x node_dim
};

struct EntityNodeInit {
  Var e0;   // N x node_dim
  Var e_w;  // N x 2 * mention_hidden
  Var e_e;  // N x entity_dim (rows of E^E); invalid when entity_level is off
};

// Word-level BiGRU per sentence, [last fwd, first bwd] per sentence, then a
// sentence-level BiGRU whose per-position states are the node encodings.
SentenceNodeInit encode_sentences(ad::Binder& bind, const EncoderParams& p,
                                  const DocumentInput& input);

EntityNodeInit encode_entities(ad::Binder& bind, const EncoderParams& p,
                               const DocumentInput& input);

// Word-level embedding of one SEP-joined mention sequence.
Var encode_mentions(ad::Binder& bind, const BiGru& rnn, ParamId word_embedding,
                    const std::vector<Index>& ids);
// One encode_mentions row per sequence, computed as a single batch.
Var encode_mention_set(ad::Binder& bind, const BiGru& rnn, ParamId word_embedding,
                       const std::vector<std::vector<Index>>& sequences);

}  // namespace kgsumm::encoder
