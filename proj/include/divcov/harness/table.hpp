#pragma once

#include <optional>
#include <string>
#include <vector>

#include "divcov/core/serialize.hpp"
#include "divcov/core/types.hpp"
#include "divcov/harness/store.hpp"
#include "divcov/metrics/metrics.hpp"
#include "divcov/sampling/collect.hpp"

namespace divcov::harness {

struct TableBuildOptions {
  const sampling::ChatEndpoint* endpoint = nullptr;  // null: stored answers only
  sampling::CollectOptions collect;
  int threads = 1;
  TimingLog* timing = nullptr;
  // Rows of an earlier scores file; reused when their answers_sha matches.
  const std::vector<ScoreRow>* previous = nullptr;
};

struct CellFailure {
  std::string query_id;
  std::string model;
  std::string message;
  int exit_code = 0;
};

struct TableBuildResult {
  ScoreTable table;
  std::vector<ScoreRow> rows;  // filled cells, with answers_sha
  int sampled = 0;
  int scored = 0;
  int reused = 0;
  std::vector<CellFailure> failures;
};

// Fills every (query, model) cell: reuse a previous row whose answers hash
// matches the store, else score stored answers, else sample them through the
// endpoint and persist. Failed cells are reported and left empty.
TableBuildResult build_score_table(const std::vector<Query>& queries, const ModelPool& pool,
                                   PromptKind kind, const DecodingConfig& decoding,
                                   AnswerStore& store, const metrics::MetricSuite& suite,
                                   const TableBuildOptions& options = {});

// Samples any missing answer sets without scoring them.
TableBuildResult sample_missing(const std::vector<Query>& queries, const ModelPool& pool,
                                PromptKind kind, const DecodingConfig& decoding,
                                AnswerStore& store, const TableBuildOptions& options);

}  // namespace divcov::harness
