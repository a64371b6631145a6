#pragma once

#include <cstdint>
#include <vector>

#include "kgsumm/corpus/cooccurrence.hpp"
#include "kgsumm/corpus/document.hpp"

namespace kgsumm::synthetic {

// Planted-signal corpus. Each document has `planted` sentences built from a
// core of salient keywords and salient-entity mentions padded with filler;
// the reference summary is the list of cores in document order. Salient
// entities are mentioned only inside planted sentences and are linked pairs
// in the co-occurrence table when both are linked. Other entities appear only
// in filler sentences. Keywords, filler words and entity tokens come from
// disjoint pools, so the greedy oracle recovers the planted set exactly.
struct SyntheticConfig {
  std::size_t documents = 200;
  std::size_t sentences = 10;
  std::size_t entities = 6;
  std::size_t planted = 4;
  std::size_t salient_entities = 3;
  std::size_t keyword_pool = 300;
  std::size_t filler_pool = 200;
  std::size_t entity_pool = 120;
  double linked_fraction = 0.8;
  double dev_fraction = 0.1;
  double test_fraction = 0.1;
  std::uint64_t seed = 7;
};

struct SyntheticCorpus {
  std::vector<corpus::AnnotatedDocument> documents;  // oracle labels filled in
  corpus::CooccurrenceTable cooccurrence;
  std::vector<std::vector<std::size_t>> planted_sentences;  // ascending
  std::vector<std::vector<std::size_t>> salient_entities;   // ascending entity indices
};

// Throws ConfigError when the sizes cannot be satisfied.
SyntheticCorpus generate(const SyntheticConfig& config);

}  // namespace kgsumm::synthetic
