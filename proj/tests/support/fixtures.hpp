#pragma once

#include <algorithm>
#include <random>
#include <string>

#include "kgsumm/corpus/cooccurrence.hpp"
#include "kgsumm/corpus/document.hpp"
#include "kgsumm/training/config.hpp"

namespace kgsumm::testing {

// Five sentences about the Tamil Tigers with four entities. s1 and s2 share
// e1, s3 contains e2, e2 and e3 co-occur in the knowledge graph, e4 is unlinked.
inline corpus::AnnotatedDocument five_sentence_document() {
  corpus::AnnotatedDocument d;
  d.id = "tigers";
  d.sentences = {
      {"tamil", "tigers", "rebels", "attacked", "the", "base"},
      {"the", "tigers", "said", "the", "attack", "succeeded"},
      {"sri", "lanka", "army", "denied", "the", "claim"},
      {"colombo", "officials", "and", "the", "army", "met"},
      {"reporters", "were", "kept", "away", "by", "police"},
  };
  d.entities = {
      {"Tamil Tigers", "LTTE", {{0, 0, 2, "tamil tigers"}, {1, 1, 2, "tigers"}}},
      {"Sri Lanka Army", "Sri_Lanka_Army", {{2, 0, 3, "sri lanka army"}, {3, 4, 5, "army"}}},
      {"Colombo", "Colombo", {{3, 0, 1, "colombo"}}},
      {"police", std::nullopt, {{4, 5, 6, "police"}}},
  };
  d.summary = {{"tamil", "tigers", "attacked", "a", "base"}, {"the", "army", "denied", "it"}};
  return d;
}

inline corpus::CooccurrenceTable five_sentence_cooccurrence() {
  corpus::CooccurrenceTable t;
  t.set("Sri_Lanka_Army", "Colombo", 3);
  t.set("LTTE", "Unrelated_Entity", 5);
  return t;
}

// Random valid document with M sentences, N entities and up to `max_mentions`
// mentions per entity; roughly `linked` of the entities carry a kg id.
inline corpus::AnnotatedDocument random_document(std::mt19937_64& rng, std::size_t m,
                                                 std::size_t n, std::size_t max_mentions = 3,
                                                 double linked = 0.7) {
  corpus::AnnotatedDocument d;
  d.id = "r" + std::to_string(rng() % 100000);
  std::uniform_int_distribution<std::size_t> len(2, 8), sent(0, m - 1);
  for (std::size_t i = 0; i < m; ++i) {
    corpus::Tokens s(len(rng));
    for (std::size_t k = 0; k < s.size(); ++k) s[k] = "w" + std::to_string(rng() % 40);
    d.sentences.push_back(s);
  }
  std::bernoulli_distribution is_linked(linked);
  for (std::size_t j = 0; j < n; ++j) {
    corpus::Entity e;
    e.name = "ent" + std::to_string(j);
    if (is_linked(rng)) e.kg_id = "K" + std::to_string(j);
    const std::size_t count = 1 + rng() % max_mentions;
    std::vector<std::pair<std::size_t, std::size_t>> pos;
    for (std::size_t c = 0; c < count; ++c) {
      const std::size_t s = sent(rng);
      pos.emplace_back(s, rng() % d.sentences[s].size());
    }
    std::sort(pos.begin(), pos.end());
    pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
    for (auto [s, t] : pos) e.mentions.push_back({s, t, t + 1, d.sentences[s][t]});
    d.entities.push_back(e);
  }
  d.summary = {d.sentences[0]};
  return d;
}

// Random co-occurrence counts over kg ids K0..K{n-1}.
inline corpus::CooccurrenceTable random_cooccurrence(std::mt19937_64& rng, std::size_t n,
                                                     double density = 0.4) {
  corpus::CooccurrenceTable t;
  std::bernoulli_distribution edge(density);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (edge(rng)) t.set("K" + std::to_string(a), "K" + std::to_string(b), 1 + rng() % 5);
    }
  }
  return t;
}

// Small dimensions so whole training phases run in milliseconds.
inline training::TrainConfig tiny_config() {
  training::TrainConfig c;
  c.threads = 1;
  c.batch_size = 4;
  c.max_steps = 10;
  c.eval_interval = 5;
  c.word_dim = 6;
  c.entity_dim = 4;
  c.encoder_hidden = 4;
  c.node_dim = 8;
  c.mention_hidden = 3;
  c.selector_hidden = 5;
  c.decoder_hidden = 6;
  c.attention_dim = 5;
  c.max_decode_steps = 8;
  c.k_entities = 3;
  return c;
}

}  // namespace kgsumm::testing
