#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "divcov/core/rng.hpp"
#include "divcov/core/types.hpp"

namespace divcov::ensemble {

enum class StrategyKind {
  kTopOverall,
  kTopKOverall,
  kRandomPerQuery,
  kFrequency,
  kOraclePerQuery,
  kOracleTopTwoPerQuery,
  kFixedModels,
  kRouterPlan,
};

// "top_overall", "top_k", "random", "frequency", "oracle", "oracle_top_two",
// "fixed", "router".
std::string_view to_token(StrategyKind kind);
StrategyKind strategy_kind_from_token(std::string_view token);

// Mean div-cov per pool model over the table's queries.
std::vector<double> column_means(const ScoreTable& table);

// Pool indices sorted by mean div-cov, descending; ties by pool index.
std::vector<int> fit_top_overall(const ScoreTable& train);

// Share of training queries on which each model is the (lowest-index) argmax.
std::vector<double> fit_frequency(const ScoreTable& train);

// Per-query argmax model with the full budget.
EnsemblePlan oracle_per_query(const ScoreTable& table);

// Counts from ratios by largest remainder; ties go to the earlier entry.
// Every nonzero ratio receives at least one answer.
std::vector<int> allocate_budget(std::span<const double> ratios, int budget);

// Plan row for the given pool indices and ratios; zero counts are dropped.
PlanRow make_row(std::string query_id, const ModelPool& pool, std::span<const int> models,
                 std::span<const double> ratios, int budget);

// Same models and ratios for every query.
EnsemblePlan fixed_plan(const std::vector<std::string>& query_ids, const ModelPool& pool,
                        std::span<const int> models, std::span<const double> ratios,
                        int budget);

// Equal split across the first k ranked models.
EnsemblePlan top_k_plan(const std::vector<std::string>& query_ids, const ModelPool& pool,
                        std::span<const int> ranked, int k, int budget);

// One uniformly drawn model per query.
EnsemblePlan random_plan(const std::vector<std::string>& query_ids, const ModelPool& pool,
                         int budget, Rng& rng);

// One model per query drawn from the fitted frequencies.
EnsemblePlan frequency_plan(const std::vector<std::string>& query_ids,
                            const ModelPool& pool, std::span<const double> frequencies,
                            int budget, Rng& rng);

// Scores a candidate plan row for one query (div-cov of the merged set).
using RowScorer = std::function<double(const PlanRow& row)>;

// Best of all singletons (full budget) and unordered pairs (half each, the
// earlier model taking the odd answer). Candidates are visited as (i, j) with
// i <= j in lexicographic order and the first maximum wins.
EnsemblePlan oracle_top_two_per_query(const std::vector<std::string>& query_ids,
                                      const ModelPool& pool, int budget,
                                      const RowScorer& scorer);

// Ratios k/10 for k = 0..10, given as the first model's share.
std::vector<double> default_ratio_grid();

// Per query, the best split of the budget between two fixed models over the
// grid of first-model shares; ties go to the earlier grid entry.
EnsemblePlan oracle_ratio_plan(const std::vector<std::string>& query_ids,
                               const ModelPool& pool, int first, int second,
                               std::span<const double> grid, int budget,
                               const RowScorer& scorer);

}  // namespace divcov::ensemble
