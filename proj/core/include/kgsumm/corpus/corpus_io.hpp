#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "kgsumm/corpus/document.hpp"

namespace kgsumm::corpus {

// Parses one JSON record (one corpus line). `line` is used in error messages.
AnnotatedDocument parse_document(const std::string& json_text, std::size_t line = 0);
std::string serialize_document(const AnnotatedDocument& doc);

// Streams validated, truncated documents from a line-delimited JSON file.
// Blank lines are skipped.
class CorpusReader {
 public:
  CorpusReader(const std::filesystem::path& path, TruncationConfig truncation = {});

  std::optional<AnnotatedDocument> next();
  std::size_t line() const { return line_; }

 private:
  std::ifstream in_;
  TruncationConfig truncation_;
  std::size_t line_ = 0;
};

std::vector<AnnotatedDocument> load_corpus(const std::filesystem::path& path,
                                           const TruncationConfig& truncation = {});
void save_corpus(const std::filesystem::path& path, const std::vector<AnnotatedDocument>& docs);

}  // namespace kgsumm::corpus
