#include "kgsumm/corpus/vocab.hpp"

#include <algorithm>
#include <map>

#include "kgsumm/errors.hpp"
#include "kgsumm/rouge/rouge.hpp"

namespace kgsumm::corpus {
namespace {

const std::vector<std::string>& special_tokens() {
  static const std::vector<std::string> kSpecials = {"<pad>", "<unk>", "<start>", "<stop>",
                                                     "<sep>"};
  return kSpecials;
}

template <typename Counts>
std::vector<std::string> by_frequency(const Counts& counts, std::size_t limit) {
  std::vector<std::pair<std::string, std::size_t>> items(counts.begin(), counts.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (items.size() > limit) items.resize(limit);
  std::vector<std::string> out;
  out.reserve(items.size());
  for (auto& [w, c] : items) out.push_back(std::move(w));
  return out;
}

}  // namespace

Vocab::Vocab() : Vocab(special_tokens()) {}

Vocab::Vocab(std::vector<std::string> words) : words_(std::move(words)) {
  const auto& specials = special_tokens();
  if (words_.size() < specials.size() ||
      !std::equal(specials.begin(), specials.end(), words_.begin())) {
    throw ValidationError("vocabulary must start with the special tokens");
  }
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], static_cast<Index>(i)).second) {
      throw ValidationError("duplicate vocabulary entry: " + words_[i]);
    }
  }
}

Vocab Vocab::build(const std::vector<AnnotatedDocument>& docs, std::size_t max_size) {
  if (max_size < kSpecialCount) throw ConfigError("vocabulary size below special-token count");
  std::map<std::string, std::size_t> counts;
  const auto& specials = special_tokens();
  auto count = [&](const std::vector<Tokens>& sents) {
    for (const auto& s : sents) {
      for (const auto& t : s) {
        std::string w = rouge::lowercase(t);
        if (std::find(specials.begin(), specials.end(), w) == specials.end()) ++counts[w];
      }
    }
  };
  for (const auto& d : docs) {
    count(d.sentences);
    count(d.summary);
  }
  std::vector<std::string> words = specials;
  for (auto& w : by_frequency(counts, max_size - kSpecialCount)) words.push_back(std::move(w));
  return Vocab(std::move(words));
}

Index Vocab::id(std::string_view token) const {
  auto it = index_.find(rouge::lowercase(token));
  return it == index_.end() ? kUnk : it->second;
}

bool Vocab::contains(std::string_view token) const {
  return index_.contains(rouge::lowercase(token));
}

EntityVocab::EntityVocab() = default;

EntityVocab::EntityVocab(std::vector<std::string> kg_ids) : kg_ids_(std::move(kg_ids)) {
  for (std::size_t i = 0; i < kg_ids_.size(); ++i) {
    if (!index_.emplace(kg_ids_[i], static_cast<Index>(i + 1)).second) {
      throw ValidationError("duplicate entity vocabulary entry: " + kg_ids_[i]);
    }
  }
}

EntityVocab EntityVocab::build(
    const std::vector<AnnotatedDocument>& docs, std::size_t max_size,
    const std::unordered_map<std::string, std::vector<double>>* allowed) {
  std::map<std::string, std::size_t> counts;
  for (const auto& d : docs) {
    for (const auto& e : d.entities) {
      if (!e.kg_id) continue;
      if (allowed != nullptr && !allowed->contains(*e.kg_id)) continue;
      ++counts[*e.kg_id];
    }
  }
  return EntityVocab(by_frequency(counts, max_size));
}

Index EntityVocab::id(const std::optional<std::string>& kg_id) const {
  if (!kg_id) return kUnk;
  auto it = index_.find(*kg_id);
  return it == index_.end() ? kUnk : it->second;
}

}  // namespace kgsumm::corpus
