#pragma once

#include <optional>
#include <string>
#include <vector>

#include "divcov/core/error.hpp"
#include "divcov/core/types.hpp"
#include "divcov/sampling/endpoint.hpp"
#include "divcov/sampling/prompts.hpp"

namespace divcov::sampling {

struct CollectOptions {
  int max_inflight = 64;
  // Request cap; defaults to ceil(20 * target_n / prior answers per call).
  std::optional<int> max_attempts;
  ItemNoun noun;
};

struct SamplingRun {
  std::string query_id;
  ModelId model;
  PromptKind kind = PromptKind::kGAll;
  DecodingConfig config;
  std::vector<std::string> raw_generations;  // request order
  std::vector<Answer> parsed;                // positions 0..n-1, arrival order
  int failed_parses = 0;
  double request_ms = 0.0;
  double parse_ms = 0.0;

  int generations() const { return static_cast<int>(raw_generations.size()); }
  AnswerSet to_answer_set() const;
};

// Raised when the request cap is reached before target_n answers.
class ShortfallError : public Error {
 public:
  explicit ShortfallError(SamplingRun partial);
  const SamplingRun& partial() const { return partial_; }

 private:
  SamplingRun partial_;
};

// Expected answers per call before any reply is seen.
int prior_answers_per_call(PromptKind kind);
int default_max_attempts(PromptKind kind, int target_n);

// Requests generations until target_n answers are parsed, then truncates to
// exactly target_n. Request i uses seed config.seed + i. Requests run in
// waves of at most max_inflight and are re-sequenced by index, so the result
// does not depend on completion order.
SamplingRun collect_answers(const Query& query, const ModelId& model, PromptKind kind,
                            const DecodingConfig& config, const ChatEndpoint& endpoint,
                            const CollectOptions& options = {});

}  // namespace divcov::sampling
