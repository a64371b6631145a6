#include "kgsumm/corpus/cooccurrence.hpp"

#include <fstream>
#include <sstream>

#include "kgsumm/errors.hpp"
#include "kgsumm/util/log.hpp"

namespace kgsumm::corpus {

std::pair<std::string, std::string> CooccurrenceTable::key(const std::string& a,
                                                           const std::string& b) {
  return a < b ? std::pair(a, b) : std::pair(b, a);
}

void CooccurrenceTable::set(const std::string& a, const std::string& b, std::uint64_t count) {
  if (a == b) return;
  counts_[key(a, b)] = count;
}

std::uint64_t CooccurrenceTable::count(const std::string& a, const std::string& b) const {
  if (a == b) return 0;
  auto it = counts_.find(key(a, b));
  return it == counts_.end() ? 0 : it->second;
}

CooccurrenceTable CooccurrenceTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open co-occurrence file: " + path.string());
  CooccurrenceTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string a, b, c;
    if (!std::getline(row, a, '\t') || !std::getline(row, b, '\t') || !std::getline(row, c)) {
      throw ParseError("expected 'kg_id_a<TAB>kg_id_b<TAB>count'", lineno);
    }
    long long count = -1;
    try {
      std::size_t used = 0;
      count = std::stoll(c, &used);
      if (used != c.size()) count = -1;
    } catch (const std::exception&) {
      count = -1;
    }
    if (count < 0) throw ParseError("invalid co-occurrence count '" + c + "'", lineno);
    if (table.count(a, b) != 0) {
      log::warn("co-occurrence file: pair (" + a + ", " + b + ") repeated at line " +
                std::to_string(lineno));
    }
    table.set(a, b, static_cast<std::uint64_t>(count));
  }
  return table;
}

void CooccurrenceTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write co-occurrence file: " + path.string());
  for (const auto& [k, c] : counts_) out << k.first << '\t' << k.second << '\t' << c << '\n';
}

}  // namespace kgsumm::corpus
