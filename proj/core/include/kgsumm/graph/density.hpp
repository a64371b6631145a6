#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kgsumm/corpus/document.hpp"

namespace kgsumm::graph {

// Left-inclusive bins [k*w, (k+1)*w).
struct DensityHistogram {
  double bin_width = 0.1;
  std::vector<std::size_t> counts;

  std::string to_csv() const;  // "bin_start,count"
};

DensityHistogram density_histogram(std::span<const double> densities, double bin_width = 0.1);

struct DensityThreshold {
  enum class Op { Less, GreaterEqual };
  Op op = Op::Less;
  double value = 0.0;

  bool accepts(double density) const {
    return op == Op::Less ? density < value : density >= value;
  }
  std::string label() const;
  // Accepts "<0.7", ">=0.6", "≥0.6". Throws ConfigError otherwise.
  static DensityThreshold parse(const std::string& text);
};

struct Partition {
  DensityThreshold threshold;
  std::vector<std::size_t> members;  // corpus indices, original order
};

std::vector<Partition> partition_by_density(std::span<const double> densities,
                                            std::span<const DensityThreshold> thresholds);

// SE.Density of each document (EE edges are irrelevant to the measure).
std::vector<double> document_densities(std::span<const corpus::AnnotatedDocument> docs);

struct DensityReport {
  std::vector<std::string> ids;
  std::vector<double> densities;
  DensityHistogram histogram;
  std::vector<Partition> partitions;

  std::string to_json() const;
};

DensityReport density_report(std::span<const corpus::AnnotatedDocument> docs,
                             std::span<const DensityThreshold> thresholds = {},
                             double bin_width = 0.1);

// Corpus averages: Doc.Sent, Sum.Sent, Doc.Ent, Sum.Ent, Sent.Men, Ent.YAGO,
// SE.Density. Sum.Ent counts entities with oracle entity label 1 (computed
// when absent). Sent.Men is total mentions over total sentences.
struct CorpusStats {
  std::size_t documents = 0;
  double doc_sent = 0.0;
  double sum_sent = 0.0;
  double doc_ent = 0.0;
  double sum_ent = 0.0;
  double sent_men = 0.0;
  double ent_yago = 0.0;
  double se_density = 0.0;

  std::string to_json() const;
};

CorpusStats corpus_stats(std::span<const corpus::AnnotatedDocument> docs);

}  // namespace kgsumm::graph
