#include <gtest/gtest.h>

#include <map>
#include <set>

#include "fixtures.hpp"
#include "kgsumm/errors.hpp"
#include "kgsumm/graph/density.hpp"
#include "kgsumm/graph/graph.hpp"

namespace kgsumm::graph {
namespace {

using ad::Tensor;
using corpus::AnnotatedDocument;

// Distinct sentence-entity pairs straight from the mention lists.
double brute_density(const AnnotatedDocument& d) {
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t j = 0; j < d.entities.size(); ++j) {
    for (const auto& m : d.entities[j].mentions) pairs.emplace(m.sentence, j);
  }
  return (static_cast<double>(pairs.size()) + 1.0) /
         static_cast<double>(d.sentences.size() + d.entities.size());
}

AnnotatedDocument grid_document(std::size_t m, std::size_t n,
                                const std::vector<std::pair<std::size_t, std::size_t>>& se) {
  AnnotatedDocument d;
  d.id = "grid";
  for (std::size_t i = 0; i < m; ++i) d.sentences.push_back({"a", "b", "c", "d", "e"});
  d.entities.resize(n);
  for (std::size_t j = 0; j < n; ++j) d.entities[j].name = "e" + std::to_string(j);
  std::map<std::size_t, std::size_t> slot;
  for (auto [s, j] : se) {
    const std::size_t t = slot[s]++;
    d.entities[j].mentions.push_back({s, t, t + 1, "x"});
  }
  for (auto& e : d.entities) {
    std::sort(e.mentions.begin(), e.mentions.end(),
              [](const auto& a, const auto& b) {
                return std::pair{a.sentence, a.start} < std::pair{b.sentence, b.start};
              });
  }
  return d;
}

TEST(Graph, FiveSentenceReconstruction) {
  const auto d = testing::five_sentence_document();
  corpus::validate(d);
  const auto g = build_graph(d, testing::five_sentence_cooccurrence());
  EXPECT_EQ(g.sentences, 5u);
  EXPECT_EQ(g.entities, 4u);
  EXPECT_EQ(g.ss.size(), 4u);
  for (const Edge& e : g.ss) {
    EXPECT_EQ(e.j, e.i + 1);
    EXPECT_EQ(e.weight, 1.0);
  }
  const Tensor se = g.dense(EdgeType::SE);
  EXPECT_EQ(se(2, g.entity_node(1)), 1.0);  // s3 contains e2
  EXPECT_EQ(se(g.entity_node(1), 2), 1.0);
  ASSERT_EQ(g.ee.size(), 1u);
  EXPECT_EQ(g.ee[0], (Edge{g.entity_node(1), g.entity_node(2), 3.0}));
}

TEST(Graph, SingleSentenceHasNoEdges) {
  AnnotatedDocument d;
  d.sentences = {{"only"}};
  const auto g = build_graph(d, {});
  EXPECT_TRUE(g.ss.empty() && g.se.empty() && g.ee.empty());
  EXPECT_DOUBLE_EQ(se_density(g), 1.0);
}

TEST(Graph, RepeatedMentionsAccumulateWeight) {
  const auto d = grid_document(2, 1, {{1, 0}, {1, 0}});
  const auto g = build_graph(d, {});
  ASSERT_EQ(g.se.size(), 1u);
  EXPECT_EQ(g.se[0].weight, 2.0);
  EXPECT_EQ(g.se_count(), 1u);
}

TEST(Graph, EeEdgesNeedBothEntitiesLinked) {
  auto d = grid_document(2, 3, {{0, 0}, {0, 1}, {1, 2}});
  d.entities[0].kg_id = "A";
  d.entities[1].kg_id = "B";
  corpus::CooccurrenceTable cooc;
  cooc.set("A", "B", 2);
  cooc.set("A", "C", 7);
  const auto g = build_graph(d, cooc);
  ASSERT_EQ(g.ee.size(), 1u);
  EXPECT_EQ(g.ee[0].weight, 2.0);
  GraphOptions opts;
  opts.ee_edges = false;
  opts.ss_edges = false;
  const auto bare = build_graph(d, cooc, opts);
  EXPECT_TRUE(bare.ee.empty() && bare.ss.empty());
  EXPECT_EQ(bare.se.size(), 3u);
}

TEST(Graph, RandomDocumentsSatisfyPlacementRules) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 1 + rng() % 8, n = rng() % 7;
    const auto d = testing::random_document(rng, m, n);
    corpus::validate(d);
    const auto cooc = testing::random_cooccurrence(rng, n);
    const auto g = build_graph(d, cooc);
    const Index size = static_cast<Index>(m + n);
    for (EdgeType t : kEdgeTypes) {
      const Tensor a = g.dense(t);
      ASSERT_EQ(a.rows(), size);
      EXPECT_EQ(a.mat(), a.mat().transpose());
      for (Index i = 0; i < size; ++i) {
        for (Index j = 0; j < size; ++j) {
          if (a(i, j) == 0.0) continue;
          const bool si = i < static_cast<Index>(m), sj = j < static_cast<Index>(m);
          if (t == EdgeType::SS) {
            EXPECT_TRUE(si && sj && std::abs(i - j) == 1 && a(i, j) == 1.0);
          } else if (t == EdgeType::SE) {
            EXPECT_NE(si, sj);
          } else {
            EXPECT_TRUE(!si && !sj);
            const auto& ei = d.entities[static_cast<std::size_t>(i) - m];
            const auto& ej = d.entities[static_cast<std::size_t>(j) - m];
            ASSERT_TRUE(ei.linked() && ej.linked());
            EXPECT_EQ(a(i, j), static_cast<double>(cooc.count(*ei.kg_id, *ej.kg_id)));
          }
        }
      }
    }
    EXPECT_EQ(g.ss.size(), m - 1);
    for (std::size_t j = 0; j < n; ++j) {
      std::map<std::size_t, double> counts;
      for (const auto& mt : d.entities[j].mentions) counts[mt.sentence] += 1.0;
      for (auto [s, c] : counts) {
        EXPECT_EQ(g.dense(EdgeType::SE)(static_cast<Index>(s), g.entity_node(j)), c);
      }
    }
  }
}

TEST(Density, MatchesBruteForceCounting) {
  std::mt19937_64 rng(18);
  for (int trial = 0; trial < 50; ++trial) {
    const auto d = testing::random_document(rng, 1 + rng() % 9, rng() % 8, 4);
    EXPECT_EQ(se_density(build_graph(d, {})), brute_density(d));
  }
}

TEST(Density, HandValues) {
  std::vector<std::pair<std::size_t, std::size_t>> eight;
  for (std::size_t k = 0; k < 8; ++k) eight.emplace_back(k % 5, k % 4);
  EXPECT_DOUBLE_EQ(se_density(build_graph(grid_document(5, 4, eight), {})), 1.0);

  SentenceEntityGraph empty_se;
  empty_se.sentences = 5;
  empty_se.entities = 4;
  EXPECT_DOUBLE_EQ(se_density(empty_se), 1.0 / 9.0);
  EXPECT_THROW(se_density(SentenceEntityGraph{}), ValidationError);
}

TEST(Density, NoMentionsGivesReciprocalNodeCount) {
  std::mt19937_64 rng(19);
  auto d = testing::random_document(rng, 6, 3);
  for (auto& e : d.entities) e.mentions.clear();
  const auto g = build_graph(d, {});
  EXPECT_EQ(g.se_count(), 0u);
  EXPECT_DOUBLE_EQ(se_density(g), 1.0 / 9.0);
}

TEST(Partition, ThresholdsAndNesting) {
  EXPECT_EQ(DensityThreshold::parse("<0.7").label(), "<0.7");
  EXPECT_EQ(DensityThreshold::parse(">=0.6").op, DensityThreshold::Op::GreaterEqual);
  EXPECT_EQ(DensityThreshold::parse("\xE2\x89\xA5" "0.6").value, 0.6);
  EXPECT_THROW(DensityThreshold::parse("~0.6"), ConfigError);
  EXPECT_THROW(DensityThreshold::parse("<abc"), ConfigError);

  const std::vector<double> one = {0.57};
  const std::vector<DensityThreshold> ge = {DensityThreshold::parse(">=0.6")};
  EXPECT_TRUE(partition_by_density(one, ge)[0].members.empty());

  std::mt19937_64 rng(20);
  std::uniform_real_distribution<double> u(0.05, 0.99);
  std::vector<double> dens(300);
  for (auto& v : dens) v = u(rng);
  std::vector<DensityThreshold> th;
  for (const char* s : {"<0.5", "<0.6", "<0.7", "<0.8"}) th.push_back(DensityThreshold::parse(s));
  const auto parts = partition_by_density(dens, th);
  for (std::size_t k = 0; k + 1 < parts.size(); ++k) {
    EXPECT_TRUE(std::includes(parts[k + 1].members.begin(), parts[k + 1].members.end(),
                              parts[k].members.begin(), parts[k].members.end()));
    EXPECT_LT(parts[k].members.size(), parts[k + 1].members.size());
  }
  const std::vector<DensityThreshold> all = {DensityThreshold::parse("<1.0")};
  EXPECT_EQ(partition_by_density(dens, all)[0].members.size(), dens.size());
}

TEST(Partition, SplitMembershipIsPreserved) {
  std::mt19937_64 rng(21);
  std::vector<AnnotatedDocument> docs;
  for (int i = 0; i < 30; ++i) {
    docs.push_back(testing::random_document(rng, 4, 3));
    docs.back().split = static_cast<corpus::Split>(i % 3);
  }
  const std::vector<DensityThreshold> th = {DensityThreshold::parse("<0.7")};
  const auto report = density_report(docs, th);
  for (std::size_t idx : report.partitions[0].members) {
    EXPECT_LT(report.densities[idx], 0.7);
    EXPECT_EQ(docs[idx].split, static_cast<corpus::Split>(idx % 3));
  }
  EXPECT_NE(report.to_json().find("\"partitions\""), std::string::npos);
}

TEST(Histogram, LeftInclusiveBins) {
  const std::vector<double> v = {0.0, 0.1, 0.15, 0.99, 1.0};
  const auto h = density_histogram(v, 0.1);
  EXPECT_EQ(h.counts[0], 1u);
  EXPECT_EQ(h.counts[1], 2u);
  EXPECT_EQ(h.counts[9], 1u);
  EXPECT_EQ(h.to_csv().substr(0, 16), "bin_start,count\n");
  EXPECT_THROW(density_histogram(v, 0.0), ConfigError);
}

TEST(CorpusStats, HandCounts) {
  auto a = grid_document(2, 2, {{0, 0}, {0, 0}, {1, 1}});
  a.entities[0].kg_id = "Q1";
  a.summary = {{"zzz"}};
  auto b = grid_document(4, 1, {{3, 0}});
  b.summary = {{"a"}, {"b"}};
  const std::vector<AnnotatedDocument> docs = {a, b};
  const CorpusStats s = corpus_stats(docs);
  EXPECT_EQ(s.documents, 2u);
  EXPECT_DOUBLE_EQ(s.doc_sent, 3.0);
  EXPECT_DOUBLE_EQ(s.sum_sent, 1.5);
  EXPECT_DOUBLE_EQ(s.doc_ent, 1.5);
  EXPECT_DOUBLE_EQ(s.sent_men, 4.0 / 6.0);
  EXPECT_DOUBLE_EQ(s.ent_yago, 0.5);
  EXPECT_DOUBLE_EQ(s.se_density, 0.5 * (3.0 / 4.0 + 2.0 / 5.0));

  const std::vector<AnnotatedDocument> single = {a};
  const CorpusStats one = corpus_stats(single);
  EXPECT_DOUBLE_EQ(one.doc_sent, 2.0);
  EXPECT_DOUBLE_EQ(one.se_density, brute_density(a));
}

}  // namespace
}  // namespace kgsumm::graph
