#pragma once

// Shared data model: queries, models, answers, score tables, routing
// examples, ensemble plans, and decoding settings. Values are immutable once
// built and validated; every type checks its own invariants.

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace divcov {

enum class AnswerSpace { kFixedSet, kOpenEnded };

std::string_view to_token(AnswerSpace space);
AnswerSpace answer_space_from_token(std::string_view token);

enum class PromptKind {
  kG1,
  kG2,
  kGAll,
  kVerbalizedAll,
  kSystemVanilla,
  kSystemVerbalizedAll,
};

inline constexpr PromptKind kAllPromptKinds[] = {
    PromptKind::kG1,           PromptKind::kG2,
    PromptKind::kGAll,         PromptKind::kVerbalizedAll,
    PromptKind::kSystemVanilla, PromptKind::kSystemVerbalizedAll};

// "g1", "g2", "gall", "vall", "sysv", "sysvall".
std::string_view to_token(PromptKind kind);
PromptKind prompt_kind_from_token(std::string_view token);

struct Query {
  std::string id;
  std::string text;
  AnswerSpace space = AnswerSpace::kOpenEnded;
  std::optional<std::vector<std::string>> gold_answers;  // A*, FixedSet only
  std::string dataset_tag;

  bool operator==(const Query&) const = default;
};

struct ModelId {
  std::string name;
  int pool_index = 0;

  bool operator==(const ModelId&) const = default;
};

// Ordered model pool; pool_index equals the position in the vector.
using ModelPool = std::vector<ModelId>;

ModelPool make_pool(const std::vector<std::string>& names);
void validate_pool(const ModelPool& pool);

struct Answer {
  std::string text;
  int position = 0;
  ModelId model;
  PromptKind prompt_kind = PromptKind::kGAll;
  std::optional<double> quality;

  bool operator==(const Answer&) const = default;
};

struct AnswerSet {
  std::string query_id;
  ModelId model;
  PromptKind prompt_kind = PromptKind::kGAll;
  std::vector<Answer> answers;
  int budget = 0;

  bool operator==(const AnswerSet&) const = default;

  std::vector<std::string> texts() const;
  // Throws ContractError on any invariant violation.
  void validate() const;
};

// Builds a well-formed set from texts, assigning positions 0..n-1.
AnswerSet make_answer_set(std::string query_id, const ModelId& model,
                          PromptKind kind, const std::vector<std::string>& texts);

struct MetricRecord {
  double div_cov = 0.0;
  int n_unique = 0;
  double qual = 0.0;
  double unq_qual = 0.0;

  bool operator==(const MetricRecord&) const = default;
};

// Complete (query x model) grid of metric records.
class ScoreTable {
 public:
  using AccessObserver = std::function<void(const std::string& query_id)>;

  ScoreTable() = default;
  ScoreTable(std::vector<std::string> query_ids, ModelPool pool, int budget,
             PromptKind prompt_kind);

  void set(std::string_view query_id, int pool_index, const MetricRecord& record);
  bool has(std::string_view query_id, int pool_index) const;
  // Throws IncompleteError naming the cell when it is missing.
  const MetricRecord& at(std::string_view query_id, int pool_index) const;
  std::vector<double> div_cov_row(std::string_view query_id) const;

  bool complete() const;
  std::vector<std::pair<std::string, int>> missing() const;
  void require_complete() const;

  // Copy restricted to the given queries (in the given order).
  ScoreTable subset(const std::vector<std::string>& query_ids) const;

  const std::vector<std::string>& query_ids() const { return query_ids_; }
  const ModelPool& pool() const { return pool_; }
  int budget() const { return budget_; }
  PromptKind prompt_kind() const { return prompt_kind_; }
  bool contains_query(std::string_view query_id) const;

  // Called on every read of a row; used to audit which queries a fit touches.
  void set_access_observer(AccessObserver observer) const {
    observer_ = std::move(observer);
  }

  bool operator==(const ScoreTable& other) const;

 private:
  std::size_t row_of(std::string_view query_id) const;
  std::size_t cell(std::size_t row, int pool_index) const;

  std::vector<std::string> query_ids_;
  std::unordered_map<std::string, std::size_t> row_index_;
  ModelPool pool_;
  int budget_ = 0;
  PromptKind prompt_kind_ = PromptKind::kGAll;
  std::vector<std::optional<MetricRecord>> cells_;
  mutable AccessObserver observer_;
};

// One score-table row as persisted in scores.ndjson.
struct ScoreRow {
  std::string query_id;
  ModelId model;
  MetricRecord record;
  std::optional<std::string> answers_sha;

  bool operator==(const ScoreRow&) const = default;
};

struct RoutingExample {
  std::string query_id;
  int oracle_index = 0;
  std::vector<double> soft_labels;
  std::vector<double> raw_scores;

  bool operator==(const RoutingExample&) const = default;
};

struct Allocation {
  ModelId model;
  int count = 0;

  bool operator==(const Allocation&) const = default;
};

struct PlanRow {
  std::string query_id;
  std::vector<Allocation> sources;

  bool operator==(const PlanRow&) const = default;
  int total() const;
};

struct EnsemblePlan {
  int budget = 0;
  std::vector<PlanRow> rows;

  bool operator==(const EnsemblePlan&) const = default;
  void validate() const;
  const PlanRow& row(std::string_view query_id) const;
};

struct DecodingConfig {
  double temperature = 1.0;
  double top_p = 1.0;
  int max_tokens = 4096;
  int target_n = 50;
  std::int64_t seed = 0;

  bool operator==(const DecodingConfig&) const = default;
  void validate() const;
};

// Index of the maximum; ties go to the lowest index. Requires non-empty input.
std::size_t argmax_lowest(const std::vector<double>& values);

}  // namespace divcov
