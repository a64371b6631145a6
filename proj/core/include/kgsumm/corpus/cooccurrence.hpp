#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>

namespace kgsumm::corpus {

// Knowledge-graph co-occurrence counts keyed by unordered id pair.
class CooccurrenceTable {
 public:
  // Later entries for the same pair replace earlier ones. Self pairs are ignored.
  void set(const std::string& a, const std::string& b, std::uint64_t count);
  std::uint64_t count(const std::string& a, const std::string& b) const;
  std::size_t size() const { return counts_.size(); }
  const auto& entries() const { return counts_; }

  // "kg_id_a<TAB>kg_id_b<TAB>count" per line.
  static CooccurrenceTable load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

 private:
  static std::pair<std::string, std::string> key(const std::string& a, const std::string& b);
  std::map<std::pair<std::string, std::string>, std::uint64_t> counts_;
};

}  // namespace kgsumm::corpus
