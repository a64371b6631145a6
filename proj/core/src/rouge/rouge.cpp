#include "kgsumm/rouge/rouge.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "kgsumm/errors.hpp"

namespace kgsumm::rouge {
namespace {

Tokens lowered(std::span<const std::string> tokens) {
  Tokens out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(lowercase(t));
  return out;
}

std::map<std::vector<std::string>, std::size_t> ngram_counts(const Tokens& tokens, int n) {
  std::map<std::vector<std::string>, std::size_t> counts;
  const auto un = static_cast<std::size_t>(n);
  if (tokens.size() < un) return counts;
  for (std::size_t i = 0; i + un <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + un))];
  }
  return counts;
}

}  // namespace

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

Tokens flatten(std::span<const Tokens> sentences) {
  Tokens out;
  for (const auto& s : sentences) out.insert(out.end(), s.begin(), s.end());
  return out;
}

RougeScore RougeScore::from_counts(double overlap, double candidate_total,
                                   double reference_total) {
  RougeScore s;
  s.precision = candidate_total > 0 ? overlap / candidate_total : 0.0;
  s.recall = reference_total > 0 ? overlap / reference_total : 0.0;
  s.f1 = s.precision + s.recall > 0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
                                    : 0.0;
  return s;
}

RougeScore rouge_n(std::span<const std::string> candidate, std::span<const std::string> reference,
                   int n) {
  if (n < 1) throw ConfigError("rouge_n: n must be positive");
  const Tokens cand = lowered(candidate);
  const Tokens ref = lowered(reference);
  const auto cand_counts = ngram_counts(cand, n);
  const auto ref_counts = ngram_counts(ref, n);
  std::size_t cand_total = 0, ref_total = 0, overlap = 0;
  for (const auto& [g, c] : cand_counts) cand_total += c;
  for (const auto& [g, c] : ref_counts) {
    ref_total += c;
    auto it = cand_counts.find(g);
    if (it != cand_counts.end()) overlap += std::min(c, it->second);
  }
  if (ref_total == 0) return {};
  return RougeScore::from_counts(static_cast<double>(overlap), static_cast<double>(cand_total),
                                 static_cast<double>(ref_total));
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  const Tokens la = lowered(a), lb = lowered(b);
  std::vector<std::size_t> prev(lb.size() + 1, 0), cur(lb.size() + 1, 0);
  for (std::size_t i = 1; i <= la.size(); ++i) {
    for (std::size_t j = 1; j <= lb.size(); ++j) {
      cur[j] = la[i - 1] == lb[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[lb.size()];
}

RougeScore rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference) {
  if (reference.empty() || candidate.empty()) return {};
  const auto lcs = static_cast<double>(lcs_length(candidate, reference));
  return RougeScore::from_counts(lcs, static_cast<double>(candidate.size()),
                                 static_cast<double>(reference.size()));
}

RougeScore limited_length(std::span<const std::string> candidate,
                          std::span<const std::string> reference, std::size_t limit,
                          Variant variant) {
  if (limit == 0) throw ConfigError("limited_length: limit must be positive");
  const auto truncated = candidate.first(std::min(limit, candidate.size()));
  switch (variant) {
    case Variant::Rouge1: return rouge_n(truncated, reference, 1);
    case Variant::Rouge2: return rouge_n(truncated, reference, 2);
    case Variant::RougeL: return rouge_l(truncated, reference);
  }
  throw ConfigError("limited_length: unknown variant");
}

RougeTriple score_all(std::span<const std::string> candidate,
                      std::span<const std::string> reference) {
  return {rouge_n(candidate, reference, 1), rouge_n(candidate, reference, 2),
          rouge_l(candidate, reference)};
}

}  // namespace kgsumm::rouge
