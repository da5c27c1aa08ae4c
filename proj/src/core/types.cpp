#include "divcov/core/types.hpp"

#include <algorithm>
#include <unordered_set>

#include "divcov/core/error.hpp"

namespace divcov {

std::string_view to_token(AnswerSpace space) {
  return space == AnswerSpace::kFixedSet ? "fixed" : "open";
}

AnswerSpace answer_space_from_token(std::string_view token) {
  if (token == "fixed") return AnswerSpace::kFixedSet;
  if (token == "open") return AnswerSpace::kOpenEnded;
  throw ContractError("unknown answer space: " + std::string(token));
}

std::string_view to_token(PromptKind kind) {
  switch (kind) {
    case PromptKind::kG1: return "g1";
    case PromptKind::kG2: return "g2";
    case PromptKind::kGAll: return "gall";
    case PromptKind::kVerbalizedAll: return "vall";
    case PromptKind::kSystemVanilla: return "sysv";
    case PromptKind::kSystemVerbalizedAll: return "sysvall";
  }
  return "gall";
}

PromptKind prompt_kind_from_token(std::string_view token) {
  for (PromptKind kind : kAllPromptKinds) {
    if (to_token(kind) == token) return kind;
  }
  throw ContractError("unknown prompt kind: " + std::string(token));
}

ModelPool make_pool(const std::vector<std::string>& names) {
  ModelPool pool;
  pool.reserve(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    pool.push_back(ModelId{names[i], static_cast<int>(i)});
  }
  validate_pool(pool);
  return pool;
}

void validate_pool(const ModelPool& pool) {
  std::unordered_set<std::string> names;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool[i].name.empty()) throw ContractError("model name is empty");
    if (pool[i].pool_index != static_cast<int>(i)) {
      throw ContractError("pool_index of " + pool[i].name +
                          " does not match its pool position");
    }
    if (!names.insert(pool[i].name).second) {
      throw ContractError("duplicate model in pool: " + pool[i].name);
    }
  }
}

std::vector<std::string> AnswerSet::texts() const {
  std::vector<std::string> out;
  out.reserve(answers.size());
  for (const Answer& a : answers) out.push_back(a.text);
  return out;
}

void AnswerSet::validate() const {
  if (static_cast<int>(answers.size()) != budget) {
    throw ContractError("answer set for " + query_id + "/" + model.name + " has " +
                        std::to_string(answers.size()) + " answers, budget " +
                        std::to_string(budget));
  }
  for (std::size_t i = 0; i < answers.size(); ++i) {
    const Answer& a = answers[i];
    if (a.position != static_cast<int>(i)) {
      throw ContractError("answer positions must be 0..B-1 without gaps");
    }
    if (a.text.empty()) throw ContractError("empty answer text");
    if (!(a.model == model) || a.prompt_kind != prompt_kind) {
      throw ContractError("answers must share the set's model and prompt kind");
    }
  }
}

AnswerSet make_answer_set(std::string query_id, const ModelId& model,
                          PromptKind kind, const std::vector<std::string>& texts) {
  AnswerSet set;
  set.query_id = std::move(query_id);
  set.model = model;
  set.prompt_kind = kind;
  set.budget = static_cast<int>(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    set.answers.push_back(Answer{texts[i], static_cast<int>(i), model, kind, {}});
  }
  set.validate();
  return set;
}

ScoreTable::ScoreTable(std::vector<std::string> query_ids, ModelPool pool,
                       int budget, PromptKind prompt_kind)
    : query_ids_(std::move(query_ids)),
      pool_(std::move(pool)),
      budget_(budget),
      prompt_kind_(prompt_kind) {
  validate_pool(pool_);
  if (pool_.empty()) throw ContractError("score table needs a non-empty pool");
  if (budget_ < 1) throw ContractError("score table budget must be >= 1");
  for (std::size_t i = 0; i < query_ids_.size(); ++i) {
    if (!row_index_.emplace(query_ids_[i], i).second) {
      throw ContractError("duplicate query in score table: " + query_ids_[i]);
    }
  }
  cells_.resize(query_ids_.size() * pool_.size());
}

std::size_t ScoreTable::row_of(std::string_view query_id) const {
  auto it = row_index_.find(std::string(query_id));
  if (it == row_index_.end()) {
    throw ContractError("query not in score table: " + std::string(query_id));
  }
  return it->second;
}

std::size_t ScoreTable::cell(std::size_t row, int pool_index) const {
  if (pool_index < 0 || pool_index >= static_cast<int>(pool_.size())) {
    throw ContractError("pool index out of range: " + std::to_string(pool_index));
  }
  return row * pool_.size() + static_cast<std::size_t>(pool_index);
}

bool ScoreTable::contains_query(std::string_view query_id) const {
  return row_index_.count(std::string(query_id)) > 0;
}

void ScoreTable::set(std::string_view query_id, int pool_index,
                     const MetricRecord& record) {
  if (!(record.div_cov >= 0.0 && record.div_cov <= 1.0)) {
    throw ContractError("div_cov outside [0,1] for " + std::string(query_id));
  }
  if (record.n_unique < 0 || record.n_unique > budget_) {
    throw ContractError("n_unique outside [0,B] for " + std::string(query_id));
  }
  cells_[cell(row_of(query_id), pool_index)] = record;
}

bool ScoreTable::has(std::string_view query_id, int pool_index) const {
  return cells_[cell(row_of(query_id), pool_index)].has_value();
}

const MetricRecord& ScoreTable::at(std::string_view query_id, int pool_index) const {
  const std::size_t row = row_of(query_id);
  if (observer_) observer_(query_ids_[row]);
  const auto& slot = cells_[cell(row, pool_index)];
  if (!slot) {
    throw IncompleteError("missing score row (" + std::string(query_id) + ", " +
                          pool_[static_cast<std::size_t>(pool_index)].name + ")");
  }
  return *slot;
}

std::vector<double> ScoreTable::div_cov_row(std::string_view query_id) const {
  std::vector<double> row;
  row.reserve(pool_.size());
  for (const ModelId& m : pool_) row.push_back(at(query_id, m.pool_index).div_cov);
  return row;
}

bool ScoreTable::complete() const {
  return std::all_of(cells_.begin(), cells_.end(),
                     [](const auto& c) { return c.has_value(); });
}

std::vector<std::pair<std::string, int>> ScoreTable::missing() const {
  std::vector<std::pair<std::string, int>> out;
  for (std::size_t r = 0; r < query_ids_.size(); ++r) {
    for (const ModelId& m : pool_) {
      if (!cells_[cell(r, m.pool_index)]) out.emplace_back(query_ids_[r], m.pool_index);
    }
  }
  return out;
}

void ScoreTable::require_complete() const {
  const auto gaps = missing();
  if (gaps.empty()) return;
  std::string msg = "score table incomplete: " + std::to_string(gaps.size()) +
                    " missing cell(s), first (" + gaps.front().first + ", " +
                    pool_[static_cast<std::size_t>(gaps.front().second)].name + ")";
  throw IncompleteError(msg);
}

ScoreTable ScoreTable::subset(const std::vector<std::string>& query_ids) const {
  ScoreTable out(query_ids, pool_, budget_, prompt_kind_);
  for (std::size_t r = 0; r < query_ids.size(); ++r) {
    const std::size_t src = row_of(query_ids[r]);
    for (const ModelId& m : pool_) {
      out.cells_[out.cell(r, m.pool_index)] = cells_[cell(src, m.pool_index)];
    }
  }
  return out;
}

bool ScoreTable::operator==(const ScoreTable& other) const {
  return query_ids_ == other.query_ids_ && pool_ == other.pool_ &&
         budget_ == other.budget_ && prompt_kind_ == other.prompt_kind_ &&
         cells_ == other.cells_;
}

int PlanRow::total() const {
  int sum = 0;
  for (const Allocation& a : sources) sum += a.count;
  return sum;
}

void EnsemblePlan::validate() const {
  std::unordered_set<std::string> seen_queries;
  for (const PlanRow& row : rows) {
    if (!seen_queries.insert(row.query_id).second) {
      throw ContractError("plan lists query twice: " + row.query_id);
    }
    std::unordered_set<int> seen_models;
    for (const Allocation& a : row.sources) {
      if (a.count < 0) throw ContractError("negative count in plan for " + row.query_id);
      if (!seen_models.insert(a.model.pool_index).second) {
        throw ContractError("model listed twice in plan row " + row.query_id);
      }
    }
    if (row.total() != budget) {
      throw ContractError("plan counts for " + row.query_id + " sum to " +
                          std::to_string(row.total()) + ", budget is " +
                          std::to_string(budget));
    }
  }
}

const PlanRow& EnsemblePlan::row(std::string_view query_id) const {
  for (const PlanRow& r : rows) {
    if (r.query_id == query_id) return r;
  }
  throw IncompleteError("plan has no row for " + std::string(query_id));
}

void DecodingConfig::validate() const {
  if (!(temperature > 0.0)) throw ContractError("temperature must be > 0");
  if (!(top_p > 0.0 && top_p <= 1.0)) throw ContractError("top_p must be in (0,1]");
  if (target_n < 1) throw ContractError("target_n must be >= 1");
  if (max_tokens < 1) throw ContractError("max_tokens must be >= 1");
}

std::size_t argmax_lowest(const std::vector<double>& values) {
  if (values.empty()) throw ContractError("argmax of empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace divcov
