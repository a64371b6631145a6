#include "kgsumm/corpus/embeddings.hpp"

#include <fstream>
#include <sstream>

#include "kgsumm/errors.hpp"
#include "kgsumm/util/log.hpp"

namespace kgsumm::corpus {
namespace {

void fill_uniform(Eigen::Ref<ad::Matrix> row, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-0.1, 0.1);
  for (ad::Index c = 0; c < row.cols(); ++c) row(0, c) = dist(rng);
}

void copy_vector(Eigen::Ref<ad::Matrix> row, const std::vector<double>& v) {
  for (ad::Index c = 0; c < row.cols(); ++c) row(0, c) = v[static_cast<std::size_t>(c)];
}

}  // namespace

EmbeddingTable load_embedding_file(const std::filesystem::path& path, std::size_t expected_dim) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embedding file: " + path.string());
  EmbeddingTable table;
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) return table;
  {
    std::istringstream hdr(line);
    long long count = -1, dim = -1;
    if (!(hdr >> count >> dim) || count < 0 || dim <= 0) {
      throw ParseError("embedding header must be '<count> <dim>'", lineno);
    }
    table.dim = static_cast<std::size_t>(dim);
  }
  if (expected_dim != 0 && table.dim != expected_dim) {
    throw ParseError("embedding dimension " + std::to_string(table.dim) + " != expected " +
                         std::to_string(expected_dim),
                     lineno);
  }
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream row(line);
    std::string key;
    if (!(row >> key)) continue;
    std::vector<double> v;
    v.reserve(table.dim);
    std::string tok;
    while (row >> tok) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ParseError("non-numeric embedding value '" + tok + "'", lineno);
      }
    }
    if (v.size() != table.dim) {
      throw ParseError("expected " + std::to_string(table.dim) + " values for '" + key +
                           "', got " + std::to_string(v.size()),
                       lineno);
    }
    if (table.vectors.contains(key)) {
      log::warn("embedding file " + path.string() + ": duplicate key '" + key + "' at line " +
                std::to_string(lineno) + " overrides earlier entry");
    }
    table.vectors[key] = std::move(v);
  }
  return table;
}

ad::Tensor entity_embedding_matrix(const EmbeddingTable* table, const EntityVocab& vocab,
                                   std::size_t dim, std::mt19937_64& rng) {
  if (table != nullptr && table->dim != dim) {
    throw ConfigError("entity embedding table has dim " + std::to_string(table->dim) +
                      ", model expects " + std::to_string(dim));
  }
  ad::Tensor m(static_cast<ad::Index>(vocab.size()), static_cast<ad::Index>(dim));
  fill_uniform(m.mat().row(EntityVocab::kUnk), rng);
  for (std::size_t i = 0; i < vocab.kg_ids().size(); ++i) {
    auto row = m.mat().row(static_cast<ad::Index>(i + 1));
    if (table == nullptr) {
      fill_uniform(row, rng);
    } else if (auto it = table->vectors.find(vocab.kg_ids()[i]); it != table->vectors.end()) {
      copy_vector(row, it->second);
    } else {
      row = m.mat().row(EntityVocab::kUnk);
    }
  }
  return m;
}

ad::Tensor load_entity_embeddings(const std::filesystem::path& path, const EntityVocab& vocab,
                                  std::size_t dim, std::mt19937_64& rng) {
  const EmbeddingTable table = load_embedding_file(path, dim);
  return entity_embedding_matrix(&table, vocab, dim, rng);
}

ad::Tensor word_embedding_matrix(const EmbeddingTable* table, const Vocab& vocab,
                                 std::size_t dim, std::mt19937_64& rng) {
  if (table != nullptr && table->dim != dim) {
    throw ConfigError("word embedding table has dim " + std::to_string(table->dim) +
                      ", model expects " + std::to_string(dim));
  }
  ad::Tensor m(static_cast<ad::Index>(vocab.size()), static_cast<ad::Index>(dim));
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    auto row = m.mat().row(static_cast<ad::Index>(i));
    const std::vector<double>* found = nullptr;
    if (table != nullptr) {
      if (auto it = table->vectors.find(vocab.words()[i]); it != table->vectors.end()) {
        found = &it->second;
      }
    }
    if (found != nullptr) {
      copy_vector(row, *found);
    } else {
      fill_uniform(row, rng);
    }
  }
  return m;
}

}  // namespace kgsumm::corpus
