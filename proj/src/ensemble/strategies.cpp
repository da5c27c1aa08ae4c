#include "divcov/ensemble/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "divcov/core/error.hpp"

namespace divcov::ensemble {

namespace {

void require_table(const ScoreTable& table) {
  if (table.query_ids().empty() || table.pool().empty()) {
    throw ContractError("score table is empty");
  }
  table.require_complete();
}

void require_budget(int budget) {
  if (budget < 1) throw ContractError("budget must be >= 1");
}

PlanRow single_row(const std::string& query_id, const ModelId& model, int budget) {
  return PlanRow{query_id, {Allocation{model, budget}}};
}

}  // namespace

std::string_view to_token(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kTopOverall: return "top_overall";
    case StrategyKind::kTopKOverall: return "top_k";
    case StrategyKind::kRandomPerQuery: return "random";
    case StrategyKind::kFrequency: return "frequency";
    case StrategyKind::kOraclePerQuery: return "oracle";
    case StrategyKind::kOracleTopTwoPerQuery: return "oracle_top_two";
    case StrategyKind::kFixedModels: return "fixed";
    case StrategyKind::kRouterPlan: return "router";
  }
  return "?";
}

StrategyKind strategy_kind_from_token(std::string_view token) {
  for (auto kind : {StrategyKind::kTopOverall, StrategyKind::kTopKOverall,
                    StrategyKind::kRandomPerQuery, StrategyKind::kFrequency,
                    StrategyKind::kOraclePerQuery, StrategyKind::kOracleTopTwoPerQuery,
                    StrategyKind::kFixedModels, StrategyKind::kRouterPlan}) {
    if (to_token(kind) == token) return kind;
  }
  throw ContractError("unknown ensemble kind: " + std::string(token));
}

std::vector<double> column_means(const ScoreTable& table) {
  require_table(table);
  std::vector<double> sums(table.pool().size(), 0.0);
  for (const std::string& q : table.query_ids()) {
    const auto row = table.div_cov_row(q);
    for (std::size_t m = 0; m < row.size(); ++m) sums[m] += row[m];
  }
  for (double& s : sums) s /= static_cast<double>(table.query_ids().size());
  return sums;
}

std::vector<int> fit_top_overall(const ScoreTable& train) {
  const auto means = column_means(train);
  std::vector<int> order(means.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return means[a] > means[b]; });
  return order;
}

std::vector<double> fit_frequency(const ScoreTable& train) {
  require_table(train);
  std::vector<double> p(train.pool().size(), 0.0);
  for (const std::string& q : train.query_ids()) p[argmax_lowest(train.div_cov_row(q))] += 1.0;
  for (double& x : p) x /= static_cast<double>(train.query_ids().size());
  return p;
}

EnsemblePlan oracle_per_query(const ScoreTable& table) {
  require_table(table);
  EnsemblePlan plan;
  plan.budget = table.budget();
  for (const std::string& q : table.query_ids()) {
    const std::size_t best = argmax_lowest(table.div_cov_row(q));
    plan.rows.push_back(single_row(q, table.pool()[best], table.budget()));
  }
  return plan;
}

std::vector<int> allocate_budget(std::span<const double> ratios, int budget) {
  require_budget(budget);
  if (ratios.empty()) throw ContractError("no ratios given");
  double total = 0.0;
  int nonzero = 0;
  for (double r : ratios) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw ContractError("ratios must be >= 0");
    total += r;
    if (r > 0.0) ++nonzero;
  }
  if (std::abs(total - 1.0) > 1e-6) throw ContractError("ratios must sum to 1");
  if (budget < nonzero) {
    throw ContractError("budget " + std::to_string(budget) + " cannot give one answer to " +
                        std::to_string(nonzero) + " models");
  }
  const std::size_t n = ratios.size();
  std::vector<int> counts(n);
  std::vector<double> rem(n);
  int assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double exact = ratios[i] / total * budget;
    counts[i] = static_cast<int>(std::floor(exact + 1e-9));
    rem[i] = exact - counts[i];
    assigned += counts[i];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rem[a] > rem[b] + 1e-12; });
  for (std::size_t k = 0; assigned < budget; k = (k + 1) % n) {
    if (ratios[order[k]] > 0.0) {
      ++counts[order[k]];
      ++assigned;
    }
  }
  // Lift starved nonzero entries to one answer, taking from the largest.
  for (std::size_t i = 0; i < n; ++i) {
    if (ratios[i] > 0.0 && counts[i] == 0) {
      const auto donor = static_cast<std::size_t>(
          std::max_element(counts.begin(), counts.end()) - counts.begin());
      --counts[donor];
      counts[i] = 1;
    }
  }
  return counts;
}

PlanRow make_row(std::string query_id, const ModelPool& pool, std::span<const int> models,
                 std::span<const double> ratios, int budget) {
  if (models.size() != ratios.size()) {
    throw ContractError("models and ratios differ in length");
  }
  const auto counts = allocate_budget(ratios, budget);
  PlanRow row;
  row.query_id = std::move(query_id);
  for (std::size_t i = 0; i < models.size(); ++i) {
    if (models[i] < 0 || models[i] >= static_cast<int>(pool.size())) {
      throw ContractError("model index out of range: " + std::to_string(models[i]));
    }
    if (counts[i] > 0) row.sources.push_back(Allocation{pool[models[i]], counts[i]});
  }
  return row;
}

EnsemblePlan fixed_plan(const std::vector<std::string>& query_ids, const ModelPool& pool,
                        std::span<const int> models, std::span<const double> ratios,
                        int budget) {
  EnsemblePlan plan;
  plan.budget = budget;
  for (const std::string& q : query_ids) {
    plan.rows.push_back(make_row(q, pool, models, ratios, budget));
  }
  return plan;
}

EnsemblePlan top_k_plan(const std::vector<std::string>& query_ids, const ModelPool& pool,
                        std::span<const int> ranked, int k, int budget) {
  if (k < 1 || k > static_cast<int>(ranked.size())) {
    throw ContractError("top_k needs 1 <= k <= pool size");
  }
  const std::vector<double> ratios(k, 1.0 / k);
  return fixed_plan(query_ids, pool, ranked.first(k), ratios, budget);
}

EnsemblePlan random_plan(const std::vector<std::string>& query_ids, const ModelPool& pool,
                         int budget, Rng& rng) {
  require_budget(budget);
  if (pool.empty()) throw ContractError("empty model pool");
  EnsemblePlan plan;
  plan.budget = budget;
  for (const std::string& q : query_ids) {
    plan.rows.push_back(single_row(q, pool[uniform_index(rng, pool.size())], budget));
  }
  return plan;
}

EnsemblePlan frequency_plan(const std::vector<std::string>& query_ids,
                            const ModelPool& pool, std::span<const double> frequencies,
                            int budget, Rng& rng) {
  require_budget(budget);
  if (frequencies.size() != pool.size()) {
    throw ContractError("frequency vector does not match the pool");
  }
  const std::vector<double> weights(frequencies.begin(), frequencies.end());
  EnsemblePlan plan;
  plan.budget = budget;
  for (const std::string& q : query_ids) {
    plan.rows.push_back(single_row(q, pool[sample_discrete(weights, rng)], budget));
  }
  return plan;
}

EnsemblePlan oracle_top_two_per_query(const std::vector<std::string>& query_ids,
                                      const ModelPool& pool, int budget,
                                      const RowScorer& scorer) {
  require_budget(budget);
  if (pool.empty()) throw ContractError("empty model pool");
  const int m = static_cast<int>(pool.size());
  constexpr double kHalf[] = {0.5, 0.5};
  EnsemblePlan plan;
  plan.budget = budget;
  for (const std::string& q : query_ids) {
    PlanRow best_row;
    double best = -1.0;
    for (int i = 0; i < m; ++i) {
      for (int j = i; j < m; ++j) {
        if (i != j && budget < 2) continue;
        PlanRow row;
        if (i == j) {
          row = single_row(q, pool[i], budget);
        } else {
          const int pair[] = {i, j};
          row = make_row(q, pool, pair, kHalf, budget);
        }
        const double score = scorer(row);
        if (score > best) {
          best = score;
          best_row = std::move(row);
        }
      }
    }
    plan.rows.push_back(std::move(best_row));
  }
  return plan;
}

std::vector<double> default_ratio_grid() {
  std::vector<double> grid;
  for (int k = 0; k <= 10; ++k) grid.push_back(k / 10.0);
  return grid;
}

EnsemblePlan oracle_ratio_plan(const std::vector<std::string>& query_ids,
                               const ModelPool& pool, int first, int second,
                               std::span<const double> grid, int budget,
                               const RowScorer& scorer) {
  if (grid.empty()) throw ContractError("empty ratio grid");
  const int pair[] = {first, second};
  EnsemblePlan plan;
  plan.budget = budget;
  for (const std::string& q : query_ids) {
    PlanRow best_row;
    double best = -1.0;
    for (double share : grid) {
      if (share < 0.0 || share > 1.0) throw ContractError("ratio grid entries must be in [0,1]");
      const double ratios[] = {share, 1.0 - share};
      PlanRow row = make_row(q, pool, pair, ratios, budget);
      const double score = scorer(row);
      if (score > best) {
        best = score;
        best_row = std::move(row);
      }
    }
    plan.rows.push_back(std::move(best_row));
  }
  return plan;
}

}  // namespace divcov::ensemble
