#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace kgsumm::rouge {

using Tokens = std::vector<std::string>;

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  static RougeScore from_counts(double overlap, double candidate_total, double reference_total);
};

// Tokens are lowercased before comparison; no stemming, no stopword removal.
RougeScore rouge_n(std::span<const std::string> candidate, std::span<const std::string> reference,
                   int n);
RougeScore rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference);

enum class Variant { Rouge1, Rouge2, RougeL };

// Candidate truncated to `limit` tokens before scoring; `limit` must be positive.
RougeScore limited_length(std::span<const std::string> candidate,
                          std::span<const std::string> reference, std::size_t limit,
                          Variant variant = Variant::Rouge1);

struct RougeTriple {
  RougeScore r1, r2, rl;
};

RougeTriple score_all(std::span<const std::string> candidate,
                      std::span<const std::string> reference);

// Length of the longest common subsequence of two lowercased token lists.
std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

std::string lowercase(std::string_view s);

// Flattens sentence token lists into one token sequence.
Tokens flatten(std::span<const Tokens> sentences);

}  // namespace kgsumm::rouge
