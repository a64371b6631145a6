#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace kgsumm::corpus {

using Tokens = std::vector<std::string>;

// Token span [start, end) inside one sentence.
struct Mention {
  std::size_t sentence = 0;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string text;

  friend bool operator==(const Mention&, const Mention&) = default;
};

struct Entity {
  std::string name;
  std::optional<std::string> kg_id;  // absent = unlinked
  std::vector<Mention> mentions;     // document order

  bool linked() const { return kg_id.has_value(); }
  friend bool operator==(const Entity&, const Entity&) = default;
};

enum class Split { Train, Dev, Test };

std::string to_string(Split s);
Split split_from_string(const std::string& s);

struct AnnotatedDocument {
  std::string id;
  Split split = Split::Train;
  std::vector<Tokens> sentences;
  std::vector<Entity> entities;
  std::vector<Tokens> summary;
  std::optional<std::vector<int>> oracle_sentence_labels;
  std::optional<std::vector<int>> oracle_entity_labels;

  std::size_t sentence_count() const { return sentences.size(); }
  std::size_t entity_count() const { return entities.size(); }
  std::size_t mention_count() const;

  friend bool operator==(const AnnotatedDocument&, const AnnotatedDocument&) = default;
};

struct TruncationConfig {
  std::size_t max_sentences = 100;
  std::size_t max_entities = 100;
};

// Checks mention spans and ordering; throws ValidationError.
void validate(const AnnotatedDocument& doc);

// Drops sentences past the limit, mentions inside them, entities left without
// mentions, and entities past the limit (in order of first mention). Oracle
// labels are restricted to the surviving sentences and entities.
AnnotatedDocument truncate(AnnotatedDocument doc, const TruncationConfig& config);

}  // namespace kgsumm::corpus
