#include "kgsumm/corpus/document.hpp"

#include <algorithm>
#include <numeric>

#include "kgsumm/errors.hpp"

namespace kgsumm::corpus {

std::string to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Dev: return "dev";
    case Split::Test: return "test";
  }
  return "train";
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "dev") return Split::Dev;
  if (s == "test") return Split::Test;
  throw ValidationError("unknown split: " + s);
}

std::size_t AnnotatedDocument::mention_count() const {
  std::size_t n = 0;
  for (const auto& e : entities) n += e.mentions.size();
  return n;
}

void validate(const AnnotatedDocument& doc) {
  const std::string where = "document " + doc.id + ": ";
  for (std::size_t j = 0; j < doc.entities.size(); ++j) {
    const Entity& e = doc.entities[j];
    if (e.mentions.empty()) {
      throw ValidationError(where + "entity '" + e.name + "' has no mentions");
    }
    for (std::size_t k = 0; k < e.mentions.size(); ++k) {
      const Mention& m = e.mentions[k];
      if (m.sentence >= doc.sentences.size()) {
        throw ValidationError(where + "mention of '" + e.name + "' refers to sentence " +
                              std::to_string(m.sentence) + " of " +
                              std::to_string(doc.sentences.size()));
      }
      if (m.end <= m.start) {
        throw ValidationError(where + "mention of '" + e.name + "' has end " +
                              std::to_string(m.end) + " <= start " + std::to_string(m.start));
      }
      if (m.end > doc.sentences[m.sentence].size()) {
        throw ValidationError(where + "mention of '" + e.name + "' ends at token " +
                              std::to_string(m.end) + " past sentence length " +
                              std::to_string(doc.sentences[m.sentence].size()));
      }
      if (k > 0) {
        const Mention& p = e.mentions[k - 1];
        if (std::pair(m.sentence, m.start) < std::pair(p.sentence, p.start)) {
          throw ValidationError(where + "mentions of '" + e.name +
                                "' are not in document order");
        }
      }
    }
  }
  if (doc.oracle_sentence_labels && doc.oracle_sentence_labels->size() != doc.sentences.size()) {
    throw ValidationError(where + "oracle_sentence_labels length " +
                          std::to_string(doc.oracle_sentence_labels->size()) + " != " +
                          std::to_string(doc.sentences.size()) + " sentences");
  }
  if (doc.oracle_entity_labels && doc.oracle_entity_labels->size() != doc.entities.size()) {
    throw ValidationError(where + "oracle_entity_labels length " +
                          std::to_string(doc.oracle_entity_labels->size()) + " != " +
                          std::to_string(doc.entities.size()) + " entities");
  }
}

AnnotatedDocument truncate(AnnotatedDocument doc, const TruncationConfig& config) {
  if (doc.sentences.size() > config.max_sentences) {
    doc.sentences.resize(config.max_sentences);
    if (doc.oracle_sentence_labels) doc.oracle_sentence_labels->resize(config.max_sentences);
  }
  const std::size_t m = doc.sentences.size();

  std::vector<std::size_t> survivors;
  for (std::size_t j = 0; j < doc.entities.size(); ++j) {
    auto& mentions = doc.entities[j].mentions;
    std::erase_if(mentions, [m](const Mention& x) { return x.sentence >= m; });
    if (!mentions.empty()) survivors.push_back(j);
  }
  if (survivors.size() > config.max_entities) {
    // Keep the entities mentioned earliest.
    std::stable_sort(survivors.begin(), survivors.end(), [&](std::size_t a, std::size_t b) {
      const Mention& ma = doc.entities[a].mentions.front();
      const Mention& mb = doc.entities[b].mentions.front();
      return std::pair(ma.sentence, ma.start) < std::pair(mb.sentence, mb.start);
    });
    survivors.resize(config.max_entities);
    std::sort(survivors.begin(), survivors.end());
  }

  std::vector<Entity> kept;
  std::vector<int> kept_labels;
  for (std::size_t j : survivors) {
    kept.push_back(std::move(doc.entities[j]));
    if (doc.oracle_entity_labels) kept_labels.push_back((*doc.oracle_entity_labels)[j]);
  }
  doc.entities = std::move(kept);
  if (doc.oracle_entity_labels) doc.oracle_entity_labels = std::move(kept_labels);
  return doc;
}

}  // namespace kgsumm::corpus
