#include "divcov/router/labels.hpp"

#include <algorithm>
#include <string>

#include "divcov/core/error.hpp"

namespace divcov::router {

std::string_view to_token(LabelMode mode) {
  return mode == LabelMode::kOneHot ? "one_hot" : "soft";
}

LabelMode label_mode_from_token(std::string_view token) {
  if (token == "one_hot") return LabelMode::kOneHot;
  if (token == "soft") return LabelMode::kSoft;
  throw ContractError("unknown label mode: " + std::string(token));
}

std::vector<RoutingExample> build_labels(const ScoreTable& table, LabelMode mode) {
  table.require_complete();
  std::vector<RoutingExample> out;
  const std::size_t m = table.pool().size();
  for (const std::string& q : table.query_ids()) {
    RoutingExample ex;
    ex.query_id = q;
    ex.raw_scores = table.div_cov_row(q);
    ex.oracle_index = static_cast<int>(argmax_lowest(ex.raw_scores));
    ex.soft_labels.assign(m, 0.0);
    if (mode == LabelMode::kOneHot) {
      ex.soft_labels[ex.oracle_index] = 1.0;
    } else {
      const double best = ex.raw_scores[ex.oracle_index];
      for (std::size_t i = 0; i < m; ++i) {
        ex.soft_labels[i] = best > 0.0 ? ex.raw_scores[i] / best : 1.0 / static_cast<double>(m);
      }
    }
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace divcov::router
