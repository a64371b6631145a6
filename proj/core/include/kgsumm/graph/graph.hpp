#pragma once

#include <cstddef>
#include <vector>

#include "kgsumm/autodiff/tensor.hpp"
#include "kgsumm/corpus/cooccurrence.hpp"
#include "kgsumm/corpus/document.hpp"

namespace kgsumm::graph {

using ad::Index;

enum class EdgeType { SS, SE, EE };
inline constexpr EdgeType kEdgeTypes[] = {EdgeType::SS, EdgeType::SE, EdgeType::EE};
const char* to_string(EdgeType t);

// Undirected weighted edge, stored once with i < j.
struct Edge {
  Index i = 0;
  Index j = 0;
  double weight = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Sentence nodes are 0..M-1, entity nodes M..M+N-1.
struct SentenceEntityGraph {
  std::size_t sentences = 0;
  std::size_t entities = 0;
  std::vector<Edge> ss;
  std::vector<Edge> se;
  std::vector<Edge> ee;

  std::size_t node_count() const { return sentences + entities; }
  Index entity_node(std::size_t j) const { return static_cast<Index>(sentences + j); }
  const std::vector<Edge>& edges(EdgeType t) const;
  // Symmetric (M+N)x(M+N) adjacency for one edge type.
  ad::Tensor dense(EdgeType t) const;
  // Number of distinct sentence-entity pairs with nonzero weight.
  std::size_t se_count() const { return se.size(); }
};

struct GraphOptions {
  bool ss_edges = true;
  bool ee_edges = true;
};

// SS: adjacent sentences, weight 1. SE: weight = mentions of the entity in the
// sentence. EE: both entities linked and co-occurring, weight = count.
SentenceEntityGraph build_graph(const corpus::AnnotatedDocument& doc,
                                const corpus::CooccurrenceTable& cooc,
                                const GraphOptions& options = {});

// (SE.Count + 1) / (M + N). Throws ValidationError for an empty graph.
double se_density(const SentenceEntityGraph& g);

}  // namespace kgsumm::graph
