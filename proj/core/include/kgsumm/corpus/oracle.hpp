#pragma once

#include <span>
#include <vector>

#include "kgsumm/corpus/document.hpp"

namespace kgsumm::corpus {

// Mean of ROUGE-1 F1 and ROUGE-2 F1 of the selected sentences (concatenated
// in document order) against the flattened reference summary.
double oracle_objective(const AnnotatedDocument& doc, std::span<const std::size_t> selected);

// Greedy extractive oracle: repeatedly adds the sentence with the largest
// objective gain, stopping when no sentence strictly improves it. Ties go to
// the lower sentence index. Throws ValidationError on an empty reference.
std::vector<int> oracle_sentence_labels(const AnnotatedDocument& doc);

// 1 iff some mention surface of the entity occurs in a summary sentence as a
// contiguous, case-insensitive token sequence.
std::vector<int> oracle_entity_labels(const AnnotatedDocument& doc);

// Fills both label vectors when absent (or always, when `overwrite`).
void ensure_oracle_labels(AnnotatedDocument& doc, bool overwrite = false);

}  // namespace kgsumm::corpus
