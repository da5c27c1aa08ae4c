#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "divcov/core/types.hpp"
#include "divcov/equiv/provider.hpp"

namespace divcov::equiv {

struct DroppedAnswer {
  std::size_t position;  // index into the input
  std::size_t matched;   // index of the kept answer it matched first

  bool operator==(const DroppedAnswer&) const = default;
};

struct UniqueSubset {
  std::vector<std::size_t> kept;  // input indices, ascending
  std::vector<DroppedAnswer> dropped;
  std::size_t similarity_calls = 0;
};

// Greedy unique-answer extraction. Answers are visited in input order; an
// answer is dropped iff its similarity to some already-kept answer exceeds
// tau (the first such kept answer is recorded), otherwise it is kept.
// Provider failures propagate and no subset is returned.
UniqueSubset extract_unique(std::span<const std::string> answers,
                            const EquivalenceProvider& provider, double tau);

std::vector<Answer> kept_answers(const AnswerSet& set, const UniqueSubset& subset);

}  // namespace divcov::equiv
