#include "kgsumm/corpus/corpus_io.hpp"

#include <json.hpp>

#include "kgsumm/errors.hpp"

namespace kgsumm::corpus {
namespace {

using nlohmann::json;

std::vector<Tokens> token_lists(const json& j, const char* field) {
  if (!j.is_array()) throw ValidationError(std::string("'") + field + "' must be an array");
  std::vector<Tokens> out;
  out.reserve(j.size());
  for (const auto& s : j) {
    if (!s.is_array()) {
      throw ValidationError(std::string("'") + field + "' must be an array of token arrays");
    }
    out.push_back(s.get<Tokens>());
  }
  return out;
}

std::vector<int> labels(const json& j, const char* field) {
  if (!j.is_array()) throw ValidationError(std::string("'") + field + "' must be an array");
  std::vector<int> out = j.get<std::vector<int>>();
  for (int v : out) {
    if (v != 0 && v != 1) throw ValidationError(std::string("'") + field + "' must hold 0/1");
  }
  return out;
}

}  // namespace

AnnotatedDocument parse_document(const std::string& json_text, std::size_t line) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), line);
  }
  AnnotatedDocument doc;
  try {
    if (!j.is_object()) throw ValidationError("record is not a JSON object");
    doc.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
    if (j.contains("split")) doc.split = split_from_string(j.at("split").get<std::string>());
    doc.sentences = token_lists(j.at("sentences"), "sentences");
    doc.summary = j.contains("summary") ? token_lists(j.at("summary"), "summary")
                                        : std::vector<Tokens>{};
    if (j.contains("entities")) {
      for (const auto& je : j.at("entities")) {
        Entity e;
        e.name = je.at("name").get<std::string>();
        if (je.contains("kg_id") && !je.at("kg_id").is_null()) {
          e.kg_id = je.at("kg_id").get<std::string>();
        }
        for (const auto& jm : je.at("mentions")) {
          const auto start = jm.at("start").get<long long>();
          const auto end = jm.at("end").get<long long>();
          const auto sent = jm.at("sent").get<long long>();
          if (start < 0 || end < 0 || sent < 0) {
            throw ValidationError("negative mention index for entity '" + e.name + "'");
          }
          e.mentions.push_back({static_cast<std::size_t>(sent), static_cast<std::size_t>(start),
                                static_cast<std::size_t>(end),
                                jm.contains("text") ? jm.at("text").get<std::string>() : ""});
        }
        doc.entities.push_back(std::move(e));
      }
    }
    if (j.contains("oracle_sentence_labels") && !j.at("oracle_sentence_labels").is_null()) {
      doc.oracle_sentence_labels = labels(j.at("oracle_sentence_labels"), "oracle_sentence_labels");
    }
    if (j.contains("oracle_entity_labels") && !j.at("oracle_entity_labels").is_null()) {
      doc.oracle_entity_labels = labels(j.at("oracle_entity_labels"), "oracle_entity_labels");
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("schema violation: ") + e.what(), line);
  } catch (const ValidationError& e) {
    throw ValidationError("line " + std::to_string(line) + ": " + e.what());
  }
  // Fill empty mention texts from the sentence tokens.
  for (auto& e : doc.entities) {
    for (auto& m : e.mentions) {
      if (!m.text.empty() || m.sentence >= doc.sentences.size()) continue;
      const Tokens& s = doc.sentences[m.sentence];
      for (std::size_t k = m.start; k < m.end && k < s.size(); ++k) {
        if (!m.text.empty()) m.text += ' ';
        m.text += s[k];
      }
    }
  }
  try {
    validate(doc);
  } catch (const ValidationError& e) {
    throw ValidationError("line " + std::to_string(line) + ": " + e.what());
  }
  return doc;
}

std::string serialize_document(const AnnotatedDocument& doc) {
  json j;
  j["id"] = doc.id;
  j["split"] = to_string(doc.split);
  j["sentences"] = doc.sentences;
  json ents = json::array();
  for (const auto& e : doc.entities) {
    json je;
    je["name"] = e.name;
    je["kg_id"] = e.kg_id ? json(*e.kg_id) : json(nullptr);
    json ms = json::array();
    for (const auto& m : e.mentions) {
      ms.push_back({{"sent", m.sentence}, {"start", m.start}, {"end", m.end}, {"text", m.text}});
    }
    je["mentions"] = std::move(ms);
    ents.push_back(std::move(je));
  }
  j["entities"] = std::move(ents);
  j["summary"] = doc.summary;
  if (doc.oracle_sentence_labels) j["oracle_sentence_labels"] = *doc.oracle_sentence_labels;
  if (doc.oracle_entity_labels) j["oracle_entity_labels"] = *doc.oracle_entity_labels;
  return j.dump();
}

CorpusReader::CorpusReader(const std::filesystem::path& path, TruncationConfig truncation)
    : in_(path), truncation_(truncation) {
  if (!in_) throw IoError("cannot open corpus file: " + path.string());
}

std::optional<AnnotatedDocument> CorpusReader::next() {
  std::string text;
  while (std::getline(in_, text)) {
    ++line_;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    return truncate(parse_document(text, line_), truncation_);
  }
  return std::nullopt;
}

std::vector<AnnotatedDocument> load_corpus(const std::filesystem::path& path,
                                           const TruncationConfig& truncation) {
  CorpusReader reader(path, truncation);
  std::vector<AnnotatedDocument> docs;
  while (auto doc = reader.next()) docs.push_back(std::move(*doc));
  return docs;
}

void save_corpus(const std::filesystem::path& path, const std::vector<AnnotatedDocument>& docs) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write corpus file: " + path.string());
  for (const auto& d : docs) out << serialize_document(d) << '\n';
}

}  // namespace kgsumm::corpus
