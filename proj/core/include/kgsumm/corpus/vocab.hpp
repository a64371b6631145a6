#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kgsumm/autodiff/tensor.hpp"
#include "kgsumm/corpus/document.hpp"

namespace kgsumm::corpus {

using ad::Index;

// Word vocabulary. Tokens are lowercased. Ids 0..4 are the special tokens.
class Vocab {
 public:
  static constexpr Index kPad = 0;
  static constexpr Index kUnk = 1;
  static constexpr Index kStart = 2;
  static constexpr Index kStop = 3;
  static constexpr Index kSep = 4;
  static constexpr std::size_t kSpecialCount = 5;
  static constexpr std::size_t kDefaultMaxSize = 40000;

  Vocab();
  // `words` must start with the special tokens in id order.
  explicit Vocab(std::vector<std::string> words);

  // Most frequent sentence and summary tokens (ties by lexicographic order),
  // capped at `max_size` entries including the special tokens.
  static Vocab build(const std::vector<AnnotatedDocument>& docs,
                     std::size_t max_size = kDefaultMaxSize);

  Index id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& word(Index id) const { return words_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, Index> index_;
};

// Entity-level vocabulary over knowledge-graph ids. Id 0 is the UNK entity,
// used for unlinked and out-of-vocabulary entities.
class EntityVocab {
 public:
  static constexpr Index kUnk = 0;
  static constexpr std::size_t kDefaultMaxSize = 500000;

  EntityVocab();
  // `kg_ids` excludes the UNK entry.
  explicit EntityVocab(std::vector<std::string> kg_ids);

  // Most frequent linked ids in the corpus. When `allowed` is given, only ids
  // it contains are kept.
  static EntityVocab build(const std::vector<AnnotatedDocument>& docs,
                           std::size_t max_size = kDefaultMaxSize,
                           const std::unordered_map<std::string, std::vector<double>>* allowed =
                               nullptr);

  Index id(const std::optional<std::string>& kg_id) const;
  std::size_t size() const { return kg_ids_.size() + 1; }
  const std::vector<std::string>& kg_ids() const { return kg_ids_; }

 private:
  std::vector<std::string> kg_ids_;
  std::unordered_map<std::string, Index> index_;
};

}  // namespace kgsumm::corpus
