#pragma once

// Set-level metrics: diversity coverage and its ceiling, the Qual / Unq /
// UnqQual breakdown, fixed-set coverage rate, dominance, and the
// per-position quality profile.

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "divcov/core/types.hpp"
#include "divcov/equiv/extract.hpp"
#include "divcov/equiv/provider.hpp"
#include "divcov/metrics/quality.hpp"

namespace divcov::metrics {

double quality_score(const Query& query, std::string_view answer,
                     const QualityProvider& provider);

// Best achievable numerator for a size-B set of distinct answers:
// min(B, |A*|) * q_max for fixed-set queries, B * q_max otherwise.
double max_uniq_sum(const Query& query, int budget, const QualityProvider& provider);

struct SetEvaluation {
  MetricRecord record;
  std::vector<double> qualities;  // one per input answer, input order
  equiv::UniqueSubset unique;
  double numerator = 0.0;   // quality summed over unique answers
  double denominator = 0.0; // max_uniq_sum
};

// Scores every answer once, extracts the unique subset, and derives all
// metrics from the same quality vector. Budget is the number of answers.
// Fixed-set queries require FixedSetMatch quality with NormalizedMatch
// equivalence so that uniqueness agrees with gold membership.
SetEvaluation evaluate_set(const Query& query, std::span<const std::string> answers,
                           const QualityProvider& quality,
                           const equiv::EquivalenceProvider& equiv, double tau);

MetricRecord set_metrics(const Query& query, std::span<const std::string> answers,
                         const QualityProvider& quality,
                         const equiv::EquivalenceProvider& equiv, double tau);

double div_cov(const Query& query, std::span<const std::string> answers,
               const QualityProvider& quality, const equiv::EquivalenceProvider& equiv,
               double tau);

// Fraction of gold answers matched (normalised) by at least one answer.
double coverage_rate(const Query& query, std::span<const std::string> answers);

inline constexpr double kDominanceMargin = 0.05;
inline constexpr double kStrictDominanceMargin = 0.10;

struct DominanceRecord {
  std::string query_id;
  std::optional<int> dominant;  // pool index
  double margin = kDominanceMargin;
  double best_score = 0.0;
  double second_score = 0.0;
};

// scores[i] is the div-cov of pool model i. Needs at least two models.
DominanceRecord dominant_model(std::string query_id, std::span<const double> scores,
                               double margin = kDominanceMargin);

struct PositionStat {
  double mean = 0.0;
  std::optional<double> variance;  // sample variance; absent with < 2 sets
};

// qualities[s][p]: quality of answer p in set s. All rows share one length.
std::vector<PositionStat> position_quality_profile(
    const std::vector<std::vector<double>>& qualities);

// Scores the sets (reusing Answer::quality when present) and profiles them.
std::vector<PositionStat> position_quality_profile(
    std::span<const AnswerSet> sets, const std::unordered_map<std::string, Query>& queries,
    const QualityProvider& provider);

// Quality and equivalence choices per answer space, shared by the scoring
// paths of the ensemble and harness modules.
struct MetricSuite {
  std::shared_ptr<const QualityProvider> fixed_quality;
  std::shared_ptr<const equiv::EquivalenceProvider> fixed_equiv;
  std::shared_ptr<const QualityProvider> open_quality;
  std::shared_ptr<const equiv::EquivalenceProvider> open_equiv;
  double tau = equiv::kDefaultTau;

  // FixedSetMatch + NormalizedMatch for fixed sets; the given providers for
  // open-ended queries.
  static MetricSuite with_open(std::shared_ptr<const QualityProvider> open_quality,
                               std::shared_ptr<const equiv::EquivalenceProvider> open_equiv,
                               double tau = equiv::kDefaultTau);

  SetEvaluation evaluate(const Query& query, std::span<const std::string> answers) const;
};

}  // namespace divcov::metrics
