#include "divcov/equiv/extract.hpp"

#include "divcov/core/error.hpp"

namespace divcov::equiv {

UniqueSubset extract_unique(std::span<const std::string> answers,
                            const EquivalenceProvider& provider, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw ContractError("tau must lie in [0,1]");
  UniqueSubset out;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    bool duplicate = false;
    for (std::size_t kept : out.kept) {
      ++out.similarity_calls;
      if (provider.similarity(answers[i], answers[kept]) > tau) {
        out.dropped.push_back(DroppedAnswer{i, kept});
        duplicate = true;
        break;
      }
    }
    if (!duplicate) out.kept.push_back(i);
  }
  return out;
}

std::vector<Answer> kept_answers(const AnswerSet& set, const UniqueSubset& subset) {
  std::vector<Answer> out;
  out.reserve(subset.kept.size());
  for (std::size_t i : subset.kept) out.push_back(set.answers.at(i));
  return out;
}

}  // namespace divcov::equiv
