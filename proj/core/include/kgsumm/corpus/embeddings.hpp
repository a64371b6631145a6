#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "kgsumm/autodiff/tensor.hpp"
#include "kgsumm/corpus/vocab.hpp"

namespace kgsumm::corpus {

// Text embedding file: header "<count> <dim>", then "<key> v1 ... vdim".
struct EmbeddingTable {
  std::size_t dim = 0;
  std::unordered_map<std::string, std::vector<double>> vectors;
};

// Duplicate keys: the last line wins and a warning is logged. Throws
// ParseError on a malformed header, a wrong value count, or a header dimension
// different from `expected_dim` (when nonzero).
EmbeddingTable load_embedding_file(const std::filesystem::path& path,
                                   std::size_t expected_dim = 0);

// Entity-level matrix (vocab.size() x dim). Row 0 (UNK) is drawn uniformly
// from [-0.1, 0.1]; vocabulary ids found in `table` take the file vector,
// others copy the UNK row. With no table every row is random.
ad::Tensor entity_embedding_matrix(const EmbeddingTable* table, const EntityVocab& vocab,
                                   std::size_t dim, std::mt19937_64& rng);
ad::Tensor load_entity_embeddings(const std::filesystem::path& path, const EntityVocab& vocab,
                                  std::size_t dim, std::mt19937_64& rng);

// Word matrix (vocab.size() x dim): file vectors where present, otherwise
// uniform in [-0.1, 0.1].
ad::Tensor word_embedding_matrix(const EmbeddingTable* table, const Vocab& vocab,
                                 std::size_t dim, std::mt19937_64& rng);

}  // namespace kgsumm::corpus
