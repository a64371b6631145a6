#include "kgsumm/graph/density.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "kgsumm/corpus/oracle.hpp"
#include "kgsumm/errors.hpp"
#include "kgsumm/graph/graph.hpp"

namespace kgsumm::graph {
namespace {

std::string trim_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::string DensityHistogram::to_csv() const {
  std::ostringstream os;
  os << "bin_start,count\n";
  for (std::size_t k = 0; k < counts.size(); ++k) {
    os << trim_number(static_cast<double>(k) * bin_width) << ',' << counts[k] << '\n';
  }
  return os.str();
}

DensityHistogram density_histogram(std::span<const double> densities, double bin_width) {
  if (!(bin_width > 0.0)) throw ConfigError("histogram bin width must be positive");
  DensityHistogram h;
  h.bin_width = bin_width;
  for (double d : densities) {
    if (d < 0.0) throw ValidationError("negative density");
    // Tolerance keeps exact multiples of the width in their own (left-closed) bin.
    const auto bin = static_cast<std::size_t>(std::floor(d / bin_width + 1e-9));
    if (h.counts.size() <= bin) h.counts.resize(bin + 1, 0);
    ++h.counts[bin];
  }
  return h;
}

std::string DensityThreshold::label() const {
  return (op == Op::Less ? "<" : ">=") + trim_number(value);
}

DensityThreshold DensityThreshold::parse(const std::string& text) {
  DensityThreshold t;
  std::string rest;
  if (text.starts_with(">=")) {
    t.op = Op::GreaterEqual;
    rest = text.substr(2);
  } else if (text.starts_with("\xE2\x89\xA5")) {  // U+2265
    t.op = Op::GreaterEqual;
    rest = text.substr(3);
  } else if (text.starts_with("<")) {
    t.op = Op::Less;
    rest = text.substr(1);
  } else {
    throw ConfigError("density threshold must start with '<' or '>=': " + text);
  }
  try {
    std::size_t used = 0;
    t.value = std::stod(rest, &used);
    if (used != rest.size()) throw std::invalid_argument(rest);
  } catch (const std::exception&) {
    throw ConfigError("invalid density threshold value: " + text);
  }
  return t;
}

std::vector<Partition> partition_by_density(std::span<const double> densities,
                                            std::span<const DensityThreshold> thresholds) {
  std::vector<Partition> out;
  for (const auto& t : thresholds) {
    Partition p{t, {}};
    for (std::size_t i = 0; i < densities.size(); ++i) {
      if (t.accepts(densities[i])) p.members.push_back(i);
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<double> document_densities(std::span<const corpus::AnnotatedDocument> docs) {
  const corpus::CooccurrenceTable empty;
  std::vector<double> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(se_density(build_graph(d, empty, {true, false})));
  return out;
}

DensityReport density_report(std::span<const corpus::AnnotatedDocument> docs,
                             std::span<const DensityThreshold> thresholds, double bin_width) {
  DensityReport r;
  for (const auto& d : docs) r.ids.push_back(d.id);
  r.densities = document_densities(docs);
  r.histogram = density_histogram(r.densities, bin_width);
  r.partitions = partition_by_density(r.densities, thresholds);
  return r;
}

std::string DensityReport::to_json() const {
  nlohmann::ordered_json j;
  nlohmann::ordered_json docs = nlohmann::ordered_json::array();
  double total = 0.0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    docs.push_back({{"id", ids[i]}, {"se_density", densities[i]}});
    total += densities[i];
  }
  j["documents"] = std::move(docs);
  j["mean_se_density"] = ids.empty() ? 0.0 : total / static_cast<double>(ids.size());
  nlohmann::ordered_json bins = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < histogram.counts.size(); ++k) {
    bins.push_back({{"bin_start", static_cast<double>(k) * histogram.bin_width},
                    {"count", histogram.counts[k]}});
  }
  j["histogram"] = {{"bin_width", histogram.bin_width}, {"bins", std::move(bins)}};
  nlohmann::ordered_json parts = nlohmann::ordered_json::array();
  for (const auto& p : partitions) {
    nlohmann::ordered_json members = nlohmann::ordered_json::array();
    for (std::size_t m : p.members) members.push_back(ids[m]);
    parts.push_back({{"threshold", p.threshold.label()},
                     {"count", p.members.size()},
                     {"members", std::move(members)}});
  }
  j["partitions"] = std::move(parts);
  return j.dump(2);
}

CorpusStats corpus_stats(std::span<const corpus::AnnotatedDocument> docs) {
  CorpusStats s;
  s.documents = docs.size();
  if (docs.empty()) return s;
  double sentences = 0, summary_sents = 0, entities = 0, summary_ents = 0, mentions = 0,
         linked = 0, density = 0;
  const auto densities = document_densities(docs);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto& d = docs[i];
    sentences += static_cast<double>(d.sentences.size());
    summary_sents += static_cast<double>(d.summary.size());
    entities += static_cast<double>(d.entities.size());
    const auto labels =
        d.oracle_entity_labels ? *d.oracle_entity_labels : corpus::oracle_entity_labels(d);
    for (int l : labels) summary_ents += l;
    mentions += static_cast<double>(d.mention_count());
    for (const auto& e : d.entities) linked += e.linked() ? 1.0 : 0.0;
    density += densities[i];
  }
  const auto n = static_cast<double>(docs.size());
  s.doc_sent = sentences / n;
  s.sum_sent = summary_sents / n;
  s.doc_ent = entities / n;
  s.sum_ent = summary_ents / n;
  s.sent_men = sentences > 0 ? mentions / sentences : 0.0;
  s.ent_yago = linked / n;
  s.se_density = density / n;
  return s;
}

std::string CorpusStats::to_json() const {
  nlohmann::ordered_json j;
  j["documents"] = documents;
  j["Doc.Sent"] = doc_sent;
  j["Sum.Sent"] = sum_sent;
  j["Doc.Ent"] = doc_ent;
  j["Sum.Ent"] = sum_ent;
  j["Sent.Men"] = sent_men;
  j["Ent.YAGO"] = ent_yago;
  j["SE.Density"] = se_density;
  return j.dump(2);
}

}  // namespace kgsumm::graph
