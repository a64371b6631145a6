#include "kgsumm/corpus/oracle.hpp"

#include <algorithm>
#include <sstream>

#include "kgsumm/errors.hpp"
#include "kgsumm/rouge/rouge.hpp"
#include "kgsumm/util/log.hpp"

namespace kgsumm::corpus {
namespace {

Tokens split_ws(const std::string& s) {
  Tokens out;
  std::istringstream in(s);
  std::string t;
  while (in >> t) out.push_back(rouge::lowercase(t));
  return out;
}

bool contains_sequence(const Tokens& haystack, const Tokens& needle) {
  if (needle.empty() || needle.size() > haystack.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    bool match = true;
    for (std::size_t k = 0; k < needle.size() && match; ++k) {
      match = rouge::lowercase(haystack[i + k]) == needle[k];
    }
    if (match) return true;
  }
  return false;
}

}  // namespace

double oracle_objective(const AnnotatedDocument& doc, std::span<const std::size_t> selected) {
  std::vector<std::size_t> order(selected.begin(), selected.end());
  std::sort(order.begin(), order.end());
  Tokens candidate;
  for (std::size_t i : order) {
    candidate.insert(candidate.end(), doc.sentences.at(i).begin(), doc.sentences.at(i).end());
  }
  const Tokens reference = rouge::flatten(doc.summary);
  return 0.5 * (rouge::rouge_n(candidate, reference, 1).f1 +
                rouge::rouge_n(candidate, reference, 2).f1);
}

std::vector<int> oracle_sentence_labels(const AnnotatedDocument& doc) {
  if (rouge::flatten(doc.summary).empty()) {
    throw ValidationError("document " + doc.id + ": empty reference summary");
  }
  std::vector<int> labels(doc.sentences.size(), 0);
  std::vector<std::size_t> selected;
  double current = 0.0;
  while (true) {
    double best = current;
    std::ptrdiff_t best_index = -1;
    for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
      if (labels[i] == 1) continue;
      selected.push_back(i);
      const double score = oracle_objective(doc, selected);
      selected.pop_back();
      if (score > best) {
        best = score;
        best_index = static_cast<std::ptrdiff_t>(i);
      }
    }
    if (best_index < 0) break;
    labels[static_cast<std::size_t>(best_index)] = 1;
    selected.push_back(static_cast<std::size_t>(best_index));
    current = best;
  }
  return labels;
}

std::vector<int> oracle_entity_labels(const AnnotatedDocument& doc) {
  std::vector<int> labels(doc.entities.size(), 0);
  for (std::size_t j = 0; j < doc.entities.size(); ++j) {
    for (const Mention& m : doc.entities[j].mentions) {
      const Tokens needle = split_ws(m.text);
      const bool hit = std::any_of(doc.summary.begin(), doc.summary.end(),
                                   [&](const Tokens& s) { return contains_sequence(s, needle); });
      if (hit) {
        labels[j] = 1;
        break;
      }
    }
  }
  return labels;
}

void ensure_oracle_labels(AnnotatedDocument& doc, bool overwrite) {
  if (overwrite || !doc.oracle_sentence_labels) {
    doc.oracle_sentence_labels = oracle_sentence_labels(doc);
    if (std::none_of(doc.oracle_sentence_labels->begin(), doc.oracle_sentence_labels->end(),
                     [](int v) { return v == 1; })) {
      log::warn("document " + doc.id + ": oracle selected no sentence");
    }
  }
  if (overwrite || !doc.oracle_entity_labels) doc.oracle_entity_labels = oracle_entity_labels(doc);
}

}  // namespace kgsumm::corpus
