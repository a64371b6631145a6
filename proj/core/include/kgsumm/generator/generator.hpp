#pragma once

#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "kgsumm/corpus/document.hpp"
#include "kgsumm/corpus/vocab.hpp"
#include "kgsumm/encoder/encoder.hpp"

namespace kgsumm::generator {

using ad::Index;
using ad::ParamId;
using ad::Tensor;
using ad::Var;

struct GeneratorConfig {
  Index word_dim = 128;
  Index hidden = 256;          // input BiGRU, per direction
  Index mention_hidden = 192;  // entity mention BiGRU, per direction
  Index decoder_hidden = 512;
  Index attention_dim = 512;
  std::size_t max_input_tokens = 150;
  std::size_t max_decode_steps = 100;
  double lambda_coverage = 1.0;
};

struct GeneratorParams {
  GeneratorConfig config;
  Index vocab_size = 0;
  ParamId word_embedding = 0;
  encoder::BiGru input_rnn;
  encoder::BiGru mention_rnn;
  ParamId init_w = 0, init_b = 0;  // decoder state from d_rep
  encoder::GruCell decoder;
  ParamId att_decoder = 0, att_token = 0, att_entity = 0, att_coverage = 0, att_bias = 0, att_v = 0;
  ParamId gen_decoder = 0, gen_context = 0, gen_entity = 0, gen_input = 0, gen_bias = 0;
  ParamId out_w = 0, out_b = 0;

  static GeneratorParams create(ad::ParameterStore& store, const std::string& prefix,
                                const GeneratorConfig& config, ad::Tensor word_table,
                                std::mt19937_64& rng);
};

// Selected sentences in document order, concatenated and cut to `max_tokens`.
corpus::Tokens build_source(const corpus::AnnotatedDocument& doc,
                            const std::vector<std::size_t>& sentences, std::size_t max_tokens);

// Source tokens mapped into the extended vocabulary: in-vocabulary words keep
// their id, each distinct OOV word gets V + k in order of first occurrence.
struct ExtendedSource {
  std::vector<Index> input_ids;  // embedding rows (OOV -> UNK)
  std::vector<Index> ext_ids;
  std::vector<std::string> oov_words;
  Index ext_size = 0;

  static ExtendedSource build(const corpus::Tokens& tokens, const corpus::Vocab& vocab);
  // Reference token -> extended id: vocab id, else copy id, else UNK.
  Index target_id(const std::string& token, const corpus::Vocab& vocab) const;
  std::string word(Index ext_id, const corpus::Vocab& vocab) const;
};

struct EncodedSource {
  ExtendedSource ext;
  Var states;          // m x 2H, h_i^T
  Var d_rep;           // 1 x 2H, [last forward, first backward]
  Var token_features;  // m x A, h_i^T W_aT^T
  Var h_entity;        // 1 x 2 * mention_hidden
  Var entity_features; // 1 x A, h^E W_aE^T + b_attn
};

// Throws ValidationError when the source is empty.
EncodedSource encode_input(ad::Binder& bind, const GeneratorParams& p,
                           const corpus::Tokens& source, const corpus::Vocab& vocab);

// Mean of the word-level mention encodings; zero vector (with a warning) when empty.
Var encode_entity_set(ad::Binder& bind, const GeneratorParams& p,
                      const std::vector<std::vector<Index>>& mention_ids);

// Fills the entity fields of `src`.
void attach_entities(ad::Binder& bind, const GeneratorParams& p, EncodedSource& src,
                     const std::vector<std::vector<Index>>& mention_ids);

struct DecoderState {
  Var h;         // 1 x decoder_hidden
  Var coverage;  // m x 1
};

DecoderState initial_state(ad::Binder& bind, const GeneratorParams& p, const EncodedSource& src);

struct DecoderStep {
  DecoderState next;
  Var attention;   // m x 1
  Var context;     // 1 x 2H
  Var p_gen;       // 1 x 1
  Var p_vocab;     // 1 x V
  Var p_extended;  // 1 x ext_size
  Var coverage_loss;
};

DecoderStep decode_step(ad::Binder& bind, const GeneratorParams& p, const EncodedSource& src,
                        const DecoderState& state, Index prev_token,
                        std::optional<double> force_p_gen = std::nullopt);

// Reference tokens to extended ids plus STOP, limited to max_decode_steps.
std::vector<Index> target_sequence(const std::vector<corpus::Tokens>& summary,
                                   const ExtendedSource& ext, const corpus::Vocab& vocab,
                                   std::size_t max_steps);

struct GeneratorLoss {
  Var total;
  double nll = 0.0;
  double coverage = 0.0;
  std::size_t steps = 0;
};

// Teacher-forced: mean over steps of -log p(w*_t) + lambda_cov * cov_loss_t.
GeneratorLoss generator_loss(ad::Binder& bind, const GeneratorParams& p,
                             const EncodedSource& src, const std::vector<Index>& targets,
                             double lambda_coverage);

struct DecodeOptions {
  std::size_t beam = 1;  // 1 = greedy
  std::optional<std::size_t> max_steps;
  std::optional<double> force_p_gen;
};

struct Generation {
  corpus::Tokens tokens;
  std::vector<double> p_gen;
  std::vector<bool> copied;
  std::vector<std::pair<std::size_t, std::size_t>> copy_spans;  // [start, end)
  std::size_t steps = 0;  // decoder steps of the returned hypothesis, STOP included
  double log_prob = 0.0;

  std::string to_json() const;
};

Generation generate(const ad::ParameterStore& store, const GeneratorParams& p,
                    const corpus::Tokens& source,
                    const std::vector<std::vector<Index>>& entity_mentions,
                    const corpus::Vocab& vocab, const DecodeOptions& options = {});

}  // namespace kgsumm::generator
