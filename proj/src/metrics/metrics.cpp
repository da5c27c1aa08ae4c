#include "divcov/metrics/metrics.hpp"

#include <algorithm>
#include <unordered_set>

#include "divcov/core/error.hpp"
#include "divcov/core/text.hpp"

namespace divcov::metrics {

double quality_score(const Query& query, std::string_view answer,
                     const QualityProvider& provider) {
  return provider.quality(query, answer);
}

double max_uniq_sum(const Query& query, int budget, const QualityProvider& provider) {
  if (budget < 1) throw ContractError("budget must be >= 1");
  if (query.space == AnswerSpace::kFixedSet) {
    if (!query.gold_answers || query.gold_answers->empty()) {
      throw ContractError("fixed-set query without gold answers: " + query.id);
    }
    const auto gold = static_cast<int>(query.gold_answers->size());
    return std::min(budget, gold) * provider.q_max();
  }
  return budget * provider.q_max();
}

namespace {

void check_compatible(const Query& query, const QualityProvider& quality,
                      const equiv::EquivalenceProvider& equiv) {
  if (query.space == AnswerSpace::kFixedSet) {
    if (quality.kind() != QualityKind::kFixedSetMatch ||
        equiv.kind() != equiv::EquivalenceKind::kNormalizedMatch) {
      throw ContractError(
          "fixed-set query " + query.id +
          " must be scored with fixed_set quality and normalized equivalence");
    }
  } else if (quality.kind() == QualityKind::kFixedSetMatch) {
    throw ContractError("fixed_set quality on open-ended query " + query.id);
  }
}

}  // namespace

SetEvaluation evaluate_set(const Query& query, std::span<const std::string> answers,
                           const QualityProvider& quality,
                           const equiv::EquivalenceProvider& equiv, double tau) {
  if (answers.empty()) throw ContractError("cannot score an empty answer set");
  check_compatible(query, quality, equiv);

  SetEvaluation ev;
  ev.qualities = quality.quality_batch(query, answers);
  if (ev.qualities.size() != answers.size()) {
    throw ProtocolError("quality provider returned the wrong number of scores");
  }
  for (double q : ev.qualities) {
    if (!(q >= 0.0 && q <= quality.q_max())) {
      throw ContractError("quality outside [0, q_max] for query " + query.id);
    }
  }
  ev.unique = equiv::extract_unique(answers, equiv, tau);

  double total = 0.0;
  for (double q : ev.qualities) total += q;
  double unique_total = 0.0;
  for (std::size_t i : ev.unique.kept) unique_total += ev.qualities[i];

  const auto budget = static_cast<int>(answers.size());
  ev.numerator = unique_total;
  ev.denominator = max_uniq_sum(query, budget, quality);
  ev.record.n_unique = static_cast<int>(ev.unique.kept.size());
  ev.record.qual = total / budget;
  ev.record.unq_qual = unique_total / ev.record.n_unique;
  ev.record.div_cov = std::clamp(unique_total / ev.denominator, 0.0, 1.0);
  return ev;
}

MetricRecord set_metrics(const Query& query, std::span<const std::string> answers,
                         const QualityProvider& quality,
                         const equiv::EquivalenceProvider& equiv, double tau) {
  return evaluate_set(query, answers, quality, equiv, tau).record;
}

double div_cov(const Query& query, std::span<const std::string> answers,
               const QualityProvider& quality, const equiv::EquivalenceProvider& equiv,
               double tau) {
  return evaluate_set(query, answers, quality, equiv, tau).record.div_cov;
}

double coverage_rate(const Query& query, std::span<const std::string> answers) {
  if (query.space != AnswerSpace::kFixedSet || !query.gold_answers ||
      query.gold_answers->empty()) {
    throw ContractError("coverage rate needs a fixed-set query: " + query.id);
  }
  std::unordered_set<std::string> produced;
  for (const std::string& a : answers) produced.insert(text::match_form(a));
  std::size_t covered = 0;
  for (const std::string& g : *query.gold_answers) {
    if (produced.count(text::match_form(g))) ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(query.gold_answers->size());
}

DominanceRecord dominant_model(std::string query_id, std::span<const double> scores,
                               double margin) {
  if (scores.size() < 2) throw ContractError("dominance needs at least two models");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  double second = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (i != best) second = std::max(second, scores[i]);
  }
  DominanceRecord rec;
  rec.query_id = std::move(query_id);
  rec.margin = margin;
  rec.best_score = scores[best];
  rec.second_score = second;
  // Absorbs representation error in differences like 0.30 - 0.25.
  constexpr double kSlack = 1e-9;
  const double gap = scores[best] - second;
  if (gap > 0.0 && gap >= margin - kSlack) rec.dominant = static_cast<int>(best);
  return rec;
}

std::vector<PositionStat> position_quality_profile(
    const std::vector<std::vector<double>>& qualities) {
  if (qualities.empty()) return {};
  const std::size_t width = qualities.front().size();
  for (const auto& row : qualities) {
    if (row.size() != width) throw ContractError("answer sets must share one budget");
  }
  const auto n = static_cast<double>(qualities.size());
  std::vector<PositionStat> out(width);
  for (std::size_t p = 0; p < width; ++p) {
    double sum = 0.0;
    for (const auto& row : qualities) sum += row[p];
    const double mean = sum / n;
    out[p].mean = mean;
    if (qualities.size() >= 2) {
      double ss = 0.0;
      for (const auto& row : qualities) ss += (row[p] - mean) * (row[p] - mean);
      out[p].variance = ss / (n - 1.0);
    }
  }
  return out;
}

std::vector<PositionStat> position_quality_profile(
    std::span<const AnswerSet> sets, const std::unordered_map<std::string, Query>& queries,
    const QualityProvider& provider) {
  std::vector<std::vector<double>> qualities;
  for (const AnswerSet& set : sets) {
    auto it = queries.find(set.query_id);
    if (it == queries.end()) throw IncompleteError("unknown query " + set.query_id);
    std::vector<double> row;
    std::vector<std::string> unscored;
    std::vector<std::size_t> unscored_index;
    row.resize(set.answers.size());
    for (std::size_t i = 0; i < set.answers.size(); ++i) {
      if (set.answers[i].quality) {
        row[i] = *set.answers[i].quality;
      } else {
        unscored.push_back(set.answers[i].text);
        unscored_index.push_back(i);
      }
    }
    const auto scored = provider.quality_batch(it->second, unscored);
    for (std::size_t k = 0; k < scored.size(); ++k) row[unscored_index[k]] = scored[k];
    qualities.push_back(std::move(row));
  }
  return position_quality_profile(qualities);
}

MetricSuite MetricSuite::with_open(std::shared_ptr<const QualityProvider> open_quality,
                                   std::shared_ptr<const equiv::EquivalenceProvider> open_equiv,
                                   double tau) {
  MetricSuite suite;
  suite.fixed_quality = std::make_shared<FixedSetMatch>();
  suite.fixed_equiv = std::make_shared<equiv::NormalizedMatch>();
  suite.open_quality = std::move(open_quality);
  suite.open_equiv = std::move(open_equiv);
  suite.tau = tau;
  return suite;
}

SetEvaluation MetricSuite::evaluate(const Query& query,
                                    std::span<const std::string> answers) const {
  if (query.space == AnswerSpace::kFixedSet) {
    return evaluate_set(query, answers, *fixed_quality, *fixed_equiv, tau);
  }
  if (!open_quality || !open_equiv) {
    throw ContractError("no open-ended scoring configured for query " + query.id);
  }
  return evaluate_set(query, answers, *open_quality, *open_equiv, tau);
}

}  // namespace divcov::metrics
