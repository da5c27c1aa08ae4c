#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "divcov/core/types.hpp"
#include "divcov/ensemble/strategies.hpp"
#include "divcov/metrics/metrics.hpp"

namespace divcov::ensemble {

// Read access to stored answer sets keyed by (query id, pool index).
class AnswerBank {
 public:
  virtual ~AnswerBank() = default;
  // Throws IncompleteError when the set is not stored.
  virtual const AnswerSet& get(const std::string& query_id, int pool_index) const = 0;
};

class InMemoryAnswerBank final : public AnswerBank {
 public:
  void put(AnswerSet set);
  bool has(const std::string& query_id, int pool_index) const;
  const AnswerSet& get(const std::string& query_id, int pool_index) const override;
  std::size_t size() const { return sets_.size(); }

 private:
  std::map<std::pair<std::string, int>, AnswerSet> sets_;
};

struct MergedSet {
  std::string query_id;
  std::vector<Allocation> sources;
  std::vector<std::string> answers;
  int budget = 0;
};

// Takes the first `count` answers of each source in plan order.
MergedSet merge_answer_sets(const PlanRow& row, const AnswerBank& bank);

struct MeanMetrics {
  double div_cov = 0.0;
  double n_unique = 0.0;
  double qual = 0.0;
  double unq_qual = 0.0;
};

MeanMetrics mean_of(const std::vector<MetricRecord>& records);

struct PlanEvaluation {
  std::vector<std::string> query_ids;  // plan row order
  std::vector<MetricRecord> records;
  MeanMetrics mean;
};

struct EvaluateOptions {
  // When set, single-source full-budget rows reuse the table's record.
  const ScoreTable* table = nullptr;
  int threads = 0;  // 0 = hardware concurrency
};

PlanEvaluation evaluate_plan(const EnsemblePlan& plan, const AnswerBank& bank,
                             const std::unordered_map<std::string, Query>& queries,
                             const metrics::MetricSuite& suite,
                             const EvaluateOptions& options = {});

// Scorer over merged sets, for the oracle pair and ratio searches.
RowScorer merged_div_cov_scorer(const AnswerBank& bank,
                                const std::unordered_map<std::string, Query>& queries,
                                const metrics::MetricSuite& suite);

}  // namespace divcov::ensemble
