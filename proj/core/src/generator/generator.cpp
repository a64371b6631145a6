#include "kgsumm/generator/generator.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <json.hpp>

#include "kgsumm/errors.hpp"
#include "kgsumm/util/log.hpp"

namespace kgsumm::generator {

using corpus::Vocab;

GeneratorParams GeneratorParams::create(ad::ParameterStore& store, const std::string& prefix,
                                        const GeneratorConfig& c, ad::Tensor word_table,
                                        std::mt19937_64& rng) {
  if (word_table.cols() != c.word_dim) {
    throw DimensionError("generator word table has " + std::to_string(word_table.cols()) +
                         " columns, expected " + std::to_string(c.word_dim));
  }
  if (c.max_input_tokens == 0 || c.max_decode_steps == 0) {
    throw ConfigError("generator input and decode limits must be positive");
  }
  GeneratorParams p;
  p.config = c;
  p.vocab_size = word_table.rows();
  const Index enc = 2 * c.hidden;
  const Index ent = 2 * c.mention_hidden;
  const Index A = c.attention_dim;
  const Index D = c.decoder_hidden;
  p.word_embedding = store.add(prefix + ".word_embedding", std::move(word_table));
  p.input_rnn = encoder::BiGru::create(store, prefix + ".input_rnn", c.word_dim, c.hidden, rng);
  p.mention_rnn =
      encoder::BiGru::create(store, prefix + ".mention_rnn", c.word_dim, c.mention_hidden, rng);
  p.init_w = store.add_xavier(prefix + ".init_w", D, enc, rng);
  p.init_b = store.add_zeros(prefix + ".init_b", 1, D);
  p.decoder = encoder::GruCell::create(store, prefix + ".decoder", c.word_dim, D, rng);
  p.att_decoder = store.add_xavier(prefix + ".att_decoder", A, D, rng);
  p.att_token = store.add_xavier(prefix + ".att_token", A, enc, rng);
  p.att_entity = store.add_xavier(prefix + ".att_entity", A, ent, rng);
  p.att_coverage = store.add_xavier(prefix + ".att_coverage", 1, A, rng);
  p.att_bias = store.add_zeros(prefix + ".att_bias", 1, A);
  p.att_v = store.add_xavier(prefix + ".att_v", 1, A, rng);
  p.gen_decoder = store.add_xavier(prefix + ".gen_decoder", 1, D, rng);
  p.gen_context = store.add_xavier(prefix + ".gen_context", 1, enc, rng);
  p.gen_entity = store.add_xavier(prefix + ".gen_entity", 1, ent, rng);
  p.gen_input = store.add_xavier(prefix + ".gen_input", 1, c.word_dim, rng);
  p.gen_bias = store.add_zeros(prefix + ".gen_bias", 1, 1);
  p.out_w = store.add_xavier(prefix + ".out_w", p.vocab_size, D + enc, rng);
  p.out_b = store.add_zeros(prefix + ".out_b", 1, p.vocab_size);
  return p;
}

corpus::Tokens build_source(const corpus::AnnotatedDocument& doc,
                            const std::vector<std::size_t>& sentences, std::size_t max_tokens) {
  std::vector<std::size_t> order = sentences;
  std::sort(order.begin(), order.end());
  corpus::Tokens out;
  for (std::size_t s : order) {
    for (const auto& tok : doc.sentences.at(s)) {
      if (out.size() >= max_tokens) return out;
      out.push_back(tok);
    }
  }
  return out;
}

ExtendedSource ExtendedSource::build(const corpus::Tokens& tokens, const Vocab& vocab) {
  ExtendedSource e;
  const auto V = static_cast<Index>(vocab.size());
  std::unordered_map<std::string, Index> oov;
  for (const auto& raw : tokens) {
    if (vocab.contains(raw)) {
      const Index id = vocab.id(raw);
      e.input_ids.push_back(id);
      e.ext_ids.push_back(id);
      continue;
    }
    std::string w = raw;
    std::transform(w.begin(), w.end(), w.begin(), [](unsigned char ch) { return std::tolower(ch); });
    auto [it, inserted] = oov.emplace(w, V + static_cast<Index>(e.oov_words.size()));
    if (inserted) e.oov_words.push_back(w);
    e.input_ids.push_back(Vocab::kUnk);
    e.ext_ids.push_back(it->second);
  }
  e.ext_size = V + static_cast<Index>(e.oov_words.size());
  return e;
}

Index ExtendedSource::target_id(const std::string& token, const Vocab& vocab) const {
  if (vocab.contains(token)) return vocab.id(token);
  std::string w = token;
  std::transform(w.begin(), w.end(), w.begin(), [](unsigned char ch) { return std::tolower(ch); });
  auto it = std::find(oov_words.begin(), oov_words.end(), w);
  if (it != oov_words.end()) {
    return static_cast<Index>(vocab.size()) + static_cast<Index>(it - oov_words.begin());
  }
  return Vocab::kUnk;
}

std::string ExtendedSource::word(Index ext_id, const Vocab& vocab) const {
  const auto V = static_cast<Index>(vocab.size());
  if (ext_id < V) return vocab.word(ext_id);
  return oov_words.at(static_cast<std::size_t>(ext_id - V));
}

EncodedSource encode_input(ad::Binder& bind, const GeneratorParams& p,
                           const corpus::Tokens& source, const Vocab& vocab) {
  if (source.empty()) throw ValidationError("generator input is empty");
  if (static_cast<Index>(vocab.size()) != p.vocab_size) {
    throw DimensionError("vocabulary size " + std::to_string(vocab.size()) +
                         " does not match generator output size " +
                         std::to_string(p.vocab_size));
  }
  corpus::Tokens tokens = source;
  if (tokens.size() > p.config.max_input_tokens) tokens.resize(p.config.max_input_tokens);
  EncodedSource src;
  src.ext = ExtendedSource::build(tokens, vocab);
  Var x = ad::gather_rows(bind(p.word_embedding), src.ext.input_ids);
  encoder::BiGruRun run = encoder::run_bigru(bind, p.input_rnn, x);
  src.states = run.states;
  src.d_rep = run.summary();
  src.token_features = ad::matmul_nt(src.states, bind(p.att_token));
  return src;
}

Var encode_entity_set(ad::Binder& bind, const GeneratorParams& p,
                      const std::vector<std::vector<Index>>& mention_ids) {
  if (mention_ids.empty()) {
    log::warn("no entities selected; entity encoding is the zero vector");
    return bind.tape().constant(Tensor(1, 2 * p.config.mention_hidden));
  }
  return ad::mean_rows(
      encoder::encode_mention_set(bind, p.mention_rnn, p.word_embedding, mention_ids));
}

void attach_entities(ad::Binder& bind, const GeneratorParams& p, EncodedSource& src,
                     const std::vector<std::vector<Index>>& mention_ids) {
  src.h_entity = encode_entity_set(bind, p, mention_ids);
  src.entity_features =
      ad::add(ad::matmul_nt(src.h_entity, bind(p.att_entity)), bind(p.att_bias));
}

DecoderState initial_state(ad::Binder& bind, const GeneratorParams& p, const EncodedSource& src) {
  DecoderState s;
  s.h = ad::add(ad::matmul_nt(src.d_rep, bind(p.init_w)), bind(p.init_b));
  s.coverage = bind.tape().constant(Tensor(src.states.rows(), 1));
  return s;
}

DecoderStep decode_step(ad::Binder& bind, const GeneratorParams& p, const EncodedSource& src,
                        const DecoderState& state, Index prev_token,
                        std::optional<double> force_p_gen) {
  if (!src.entity_features.valid()) throw Error("decode_step: entity encoding not attached");
  ad::Tape& tape = bind.tape();
  if (prev_token < 0 || prev_token >= p.vocab_size) prev_token = Vocab::kUnk;
  const Index ids[] = {prev_token};
  Var x = ad::gather_rows(bind(p.word_embedding), ids);

  DecoderStep step;
  Var h = p.decoder.step(bind, p.decoder.input_gates(bind, x), state.h);

  Var query = ad::add(ad::matmul_nt(h, bind(p.att_decoder)), src.entity_features);
  Var cov = ad::matmul(state.coverage, bind(p.att_coverage));
  Var energy = ad::tanh(ad::add(ad::add(src.token_features, cov), query));
  Var scores = ad::matmul_nt(energy, bind(p.att_v));
  step.attention = ad::softmax(scores, ad::Axis::Col);
  step.context = ad::matmul(ad::transpose(step.attention), src.states);

  const Var hc[] = {h, step.context};
  Var logits = ad::add(ad::matmul_nt(ad::concat_cols(hc), bind(p.out_w)), bind(p.out_b));
  step.p_vocab = ad::softmax(logits, ad::Axis::Row);

  if (force_p_gen) {
    step.p_gen = tape.constant(Tensor::full(1, 1, *force_p_gen));
  } else {
    Var z = ad::matmul_nt(h, bind(p.gen_decoder));
    z = ad::add(z, ad::matmul_nt(step.context, bind(p.gen_context)));
    z = ad::add(z, ad::matmul_nt(src.h_entity, bind(p.gen_entity)));
    z = ad::add(z, ad::matmul_nt(x, bind(p.gen_input)));
    step.p_gen = ad::sigmoid(ad::add(z, bind(p.gen_bias)));
  }
  Var generate_part = ad::mul(step.p_gen, ad::pad_cols(step.p_vocab, src.ext.ext_size));
  Var copy = ad::scatter_add_cols(ad::transpose(step.attention), src.ext.ext_ids, src.ext.ext_size);
  Var copy_part = ad::mul(ad::add_scalar(ad::scale(step.p_gen, -1.0), 1.0), copy);
  step.p_extended = ad::add(generate_part, copy_part);

  step.coverage_loss = ad::sum(ad::minimum(step.attention, state.coverage));
  step.next.h = h;
  step.next.coverage = ad::add(state.coverage, step.attention);
  return step;
}

std::vector<Index> target_sequence(const std::vector<corpus::Tokens>& summary,
                                   const ExtendedSource& ext, const Vocab& vocab,
                                   std::size_t max_steps) {
  std::vector<Index> out;
  for (const auto& sent : summary) {
    for (const auto& tok : sent) out.push_back(ext.target_id(tok, vocab));
  }
  out.push_back(Vocab::kStop);
  if (out.size() > max_steps) out.resize(max_steps);
  return out;
}

GeneratorLoss generator_loss(ad::Binder& bind, const GeneratorParams& p,
                             const EncodedSource& src, const std::vector<Index>& targets,
                             double lambda_coverage) {
  if (targets.empty()) throw ValidationError("generator loss needs at least one target");
  GeneratorLoss loss;
  DecoderState state = initial_state(bind, p, src);
  Index prev = Vocab::kStart;
  std::vector<Var> terms;
  terms.reserve(targets.size());
  for (Index target : targets) {
    DecoderStep step = decode_step(bind, p, src, state, prev);
    Var prob = ad::pick(step.p_extended, 0, target);
    if (prob.value()(0, 0) <= 0.0) prob = ad::add_scalar(prob, 1e-12);
    Var nll = ad::scale(ad::log(prob), -1.0);
    loss.nll += nll.value()(0, 0);
    loss.coverage += step.coverage_loss.value()(0, 0);
    Var term = nll;
    if (lambda_coverage != 0.0) term = ad::add(nll, ad::scale(step.coverage_loss, lambda_coverage));
    terms.push_back(term);
    state = step.next;
    prev = target;
  }
  const double inv = 1.0 / static_cast<double>(targets.size());
  loss.total = ad::scale(ad::sum(ad::concat_rows(terms)), inv);
  loss.nll *= inv;
  loss.coverage *= inv;
  loss.steps = targets.size();
  return loss;
}

namespace {

double copy_mass(const EncodedSource& src, const Tensor& attention, Index w) {
  double m = 0.0;
  for (std::size_t i = 0; i < src.ext.ext_ids.size(); ++i) {
    if (src.ext.ext_ids[i] == w) m += attention(static_cast<Index>(i), 0);
  }
  return m;
}

bool was_copied(const EncodedSource& src, const DecoderStep& step, Index w, Index vocab_size) {
  if (w >= vocab_size) return true;
  const double pg = step.p_gen.value()(0, 0);
  return (1.0 - pg) * copy_mass(src, step.attention.value(), w) >
         pg * step.p_vocab.value()(0, w);
}

struct Hypothesis {
  std::vector<Index> ids;
  std::vector<double> p_gen;
  std::vector<bool> copied;
  double log_prob = 0.0;
  bool stopped = false;
  DecoderState state;
};

void finish_spans(Generation& g) {
  std::size_t i = 0;
  while (i < g.copied.size()) {
    if (!g.copied[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < g.copied.size() && g.copied[j]) ++j;
    g.copy_spans.emplace_back(i, j);
    i = j;
  }
}

Generation to_generation(const Hypothesis& h, const EncodedSource& src, const Vocab& vocab) {
  Generation g;
  for (Index id : h.ids) g.tokens.push_back(src.ext.word(id, vocab));
  g.p_gen = h.p_gen;
  g.copied = h.copied;
  g.steps = h.ids.size() + (h.stopped ? 1 : 0);
  g.log_prob = h.log_prob;
  finish_spans(g);
  return g;
}

}  // namespace

Generation generate(const ad::ParameterStore& store, const GeneratorParams& p,
                    const corpus::Tokens& source,
                    const std::vector<std::vector<Index>>& entity_mentions, const Vocab& vocab,
                    const DecodeOptions& options) {
  if (options.beam == 0) throw ConfigError("beam width must be positive");
  ad::Tape tape(false);
  ad::Binder bind(tape, store);
  EncodedSource src = encode_input(bind, p, source, vocab);
  attach_entities(bind, p, src, entity_mentions);
  const std::size_t max_steps = options.max_steps.value_or(p.config.max_decode_steps);

  Hypothesis root;
  root.state = initial_state(bind, p, src);

  struct Candidate {
    std::size_t parent;
    Index token;
    double log_prob;
  };
  std::vector<Hypothesis> live{root};
  std::vector<Hypothesis> finished;
  std::size_t steps = 0;
  while (steps < max_steps && !live.empty() && finished.size() < options.beam) {
    ++steps;
    std::vector<DecoderStep> results;
    std::vector<Candidate> cands;
    for (std::size_t hi = 0; hi < live.size(); ++hi) {
      const Hypothesis& h = live[hi];
      const Index prev = h.ids.empty() ? Vocab::kStart : h.ids.back();
      results.push_back(decode_step(bind, p, src, h.state, prev, options.force_p_gen));
      const auto& dist = results.back().p_extended.value().mat();
      std::vector<Index> order(static_cast<std::size_t>(dist.cols()));
      for (Index w = 0; w < dist.cols(); ++w) order[static_cast<std::size_t>(w)] = w;
      const std::size_t keep = std::min<std::size_t>(options.beam, order.size());
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep),
                        order.end(), [&](Index a, Index b) {
                          if (dist(0, a) != dist(0, b)) return dist(0, a) > dist(0, b);
                          return a < b;
                        });
      for (std::size_t k = 0; k < keep; ++k) {
        const Index w = order[k];
        cands.push_back({hi, w, h.log_prob + std::log(dist(0, w))});
      }
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      return a.log_prob > b.log_prob;
    });
    std::vector<Hypothesis> next;
    for (const Candidate& c : cands) {
      if (next.size() + finished.size() >= options.beam) break;
      Hypothesis h = live[c.parent];
      h.log_prob = c.log_prob;
      if (c.token == Vocab::kStop) {
        h.stopped = true;
        finished.push_back(std::move(h));
        continue;
      }
      const DecoderStep& step = results[c.parent];
      h.ids.push_back(c.token);
      h.p_gen.push_back(step.p_gen.value()(0, 0));
      h.copied.push_back(was_copied(src, step, c.token, p.vocab_size));
      h.state = step.next;
      next.push_back(std::move(h));
    }
    live = std::move(next);
  }
  for (auto& h : live) finished.push_back(std::move(h));
  const Hypothesis* best = &finished.front();
  for (const auto& h : finished) {
    if (h.log_prob > best->log_prob) best = &h;
  }
  return to_generation(*best, src, vocab);
}

std::string Generation::to_json() const {
  nlohmann::ordered_json j;
  j["tokens"] = tokens.size();
  j["steps"] = steps;
  double mean = 0.0, lo = 1.0, hi = 0.0;
  for (double v : p_gen) {
    mean += v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!p_gen.empty()) mean /= static_cast<double>(p_gen.size());
  j["p_gen"] = {{"mean", mean}, {"min", p_gen.empty() ? 0.0 : lo},
                {"max", p_gen.empty() ? 0.0 : hi}};
  auto spans = nlohmann::ordered_json::array();
  for (auto [a, b] : copy_spans) {
    std::string text;
    for (std::size_t i = a; i < b; ++i) text += (i > a ? " " : "") + tokens[i];
    spans.push_back({{"start", a}, {"end", b}, {"text", text}});
  }
  j["copied_spans"] = spans;
  return j.dump();
}

}  // namespace kgsumm::generator
