#include "kgsumm/graph/graph.hpp"

#include <map>

#include "kgsumm/errors.hpp"

namespace kgsumm::graph {

const char* to_string(EdgeType t) {
  switch (t) {
    case EdgeType::SS: return "SS";
    case EdgeType::SE: return "SE";
    case EdgeType::EE: return "EE";
  }
  return "?";
}

const std::vector<Edge>& SentenceEntityGraph::edges(EdgeType t) const {
  switch (t) {
    case EdgeType::SS: return ss;
    case EdgeType::SE: return se;
    case EdgeType::EE: return ee;
  }
  throw ConfigError("unknown edge type");
}

ad::Tensor SentenceEntityGraph::dense(EdgeType t) const {
  const auto n = static_cast<Index>(node_count());
  ad::Tensor a(n, n);
  for (const Edge& e : edges(t)) {
    a(e.i, e.j) = e.weight;
    a(e.j, e.i) = e.weight;
  }
  return a;
}

SentenceEntityGraph build_graph(const corpus::AnnotatedDocument& doc,
                                const corpus::CooccurrenceTable& cooc,
                                const GraphOptions& options) {
  SentenceEntityGraph g;
  g.sentences = doc.sentences.size();
  g.entities = doc.entities.size();

  if (options.ss_edges) {
    for (std::size_t i = 0; i + 1 < g.sentences; ++i) {
      g.ss.push_back({static_cast<Index>(i), static_cast<Index>(i + 1), 1.0});
    }
  }

  for (std::size_t j = 0; j < g.entities; ++j) {
    std::map<std::size_t, double> per_sentence;
    for (const auto& m : doc.entities[j].mentions) per_sentence[m.sentence] += 1.0;
    for (const auto& [s, w] : per_sentence) {
      g.se.push_back({static_cast<Index>(s), g.entity_node(j), w});
    }
  }

  if (options.ee_edges) {
    for (std::size_t a = 0; a < g.entities; ++a) {
      const auto& ka = doc.entities[a].kg_id;
      if (!ka) continue;
      for (std::size_t b = a + 1; b < g.entities; ++b) {
        const auto& kb = doc.entities[b].kg_id;
        if (!kb) continue;
        const auto c = cooc.count(*ka, *kb);
        if (c > 0) g.ee.push_back({g.entity_node(a), g.entity_node(b), static_cast<double>(c)});
      }
    }
  }
  return g;
}

double se_density(const SentenceEntityGraph& g) {
  if (g.node_count() == 0) throw ValidationError("se_density: graph has no nodes");
  return static_cast<double>(g.se_count() + 1) / static_cast<double>(g.node_count());
}

}  // namespace kgsumm::graph
