#include "divcov/harness/table.hpp"

#include <atomic>
#include <chrono>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>
#include <algorithm>

#include "divcov/core/error.hpp"

namespace divcov::harness {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

template <typename Fn>
void for_each_cell(std::size_t n, int threads, Fn fn) {
  const auto workers_n = static_cast<std::size_t>(std::max(1, threads));
  if (workers_n == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  for (std::size_t t = 0; t < std::min(workers_n, n); ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& w : workers) w.join();
}

// Samples and stores one cell.
void sample_cell(const Query& q, const ModelId& m, PromptKind kind,
                 const DecodingConfig& decoding, AnswerStore& store,
                 const TableBuildOptions& options) {
  if (!options.endpoint) {
    throw IncompleteError("no stored answers and no endpoint configured");
  }
  const auto start = Clock::now();
  sampling::SamplingRun run =
      sampling::collect_answers(q, m, kind, decoding, *options.endpoint, options.collect);
  if (options.timing) options.timing->record({"sample", q.id, m.name, ms_since(start)});
  store.put(run.to_answer_set());
}

CellFailure failure_for(const Query& q, const ModelId& m, const std::exception& e) {
  CellFailure f{q.id, m.name, e.what(), static_cast<int>(ExitCode::kContract)};
  if (const auto* err = dynamic_cast<const Error*>(&e)) f.exit_code = static_cast<int>(err->code());
  return f;
}

}  // namespace

TableBuildResult build_score_table(const std::vector<Query>& queries, const ModelPool& pool,
                                   PromptKind kind, const DecodingConfig& decoding,
                                   AnswerStore& store, const metrics::MetricSuite& suite,
                                   const TableBuildOptions& options) {
  decoding.validate();
  std::vector<std::string> ids;
  for (const Query& q : queries) ids.push_back(q.id);
  TableBuildResult result;
  result.table = ScoreTable(ids, pool, decoding.target_n, kind);

  std::map<std::pair<std::string, std::string>, const ScoreRow*> previous;
  if (options.previous) {
    for (const ScoreRow& r : *options.previous) previous[{r.query_id, r.model.name}] = &r;
  }

  const std::size_t n = queries.size() * pool.size();
  std::vector<std::optional<ScoreRow>> rows(n);
  std::vector<int> action(n, 0);  // 1 sampled, 2 scored, 3 reused
  std::mutex failure_mutex;

  for_each_cell(n, options.threads, [&](std::size_t i) {
    const Query& q = queries[i / pool.size()];
    const ModelId& m = pool[i % pool.size()];
    try {
      if (!store.has(q.id, m.pool_index)) {
        sample_cell(q, m, kind, decoding, store, options);
        action[i] = 1;
      }
      const std::string sha = *store.sha(q.id, m.pool_index);
      auto prev = previous.find({q.id, m.name});
      if (prev != previous.end() && prev->second->answers_sha == sha) {
        rows[i] = *prev->second;
        rows[i]->model = m;
        if (action[i] == 0) action[i] = 3;
        return;
      }
      const AnswerSet& set = store.get(q.id, m.pool_index);
      if (static_cast<int>(set.answers.size()) != decoding.target_n) {
        throw ContractError("stored set has " + std::to_string(set.answers.size()) +
                            " answers, budget is " + std::to_string(decoding.target_n));
      }
      const auto start = Clock::now();
      const metrics::SetEvaluation ev = suite.evaluate(q, set.texts());
      if (options.timing) options.timing->record({"score", q.id, m.name, ms_since(start)});
      rows[i] = ScoreRow{q.id, m, ev.record, sha};
      if (action[i] == 0) action[i] = 2;
    } catch (const std::exception& e) {
      std::lock_guard lock(failure_mutex);
      result.failures.push_back(failure_for(q, m, e));
    }
  });

  for (std::size_t i = 0; i < n; ++i) {
    if (!rows[i]) continue;
    result.table.set(rows[i]->query_id, rows[i]->model.pool_index, rows[i]->record);
    result.rows.push_back(*rows[i]);
    if (action[i] == 1) ++result.sampled;
    if (action[i] == 1 || action[i] == 2) ++result.scored;
    if (action[i] == 3) ++result.reused;
  }
  std::sort(result.failures.begin(), result.failures.end(),
            [](const CellFailure& a, const CellFailure& b) {
              return std::tie(a.query_id, a.model) < std::tie(b.query_id, b.model);
            });
  return result;
}

TableBuildResult sample_missing(const std::vector<Query>& queries, const ModelPool& pool,
                                PromptKind kind, const DecodingConfig& decoding,
                                AnswerStore& store, const TableBuildOptions& options) {
  decoding.validate();
  TableBuildResult result;
  const std::size_t n = queries.size() * pool.size();
  std::vector<int> sampled(n, 0);
  std::mutex failure_mutex;
  for_each_cell(n, options.threads, [&](std::size_t i) {
    const Query& q = queries[i / pool.size()];
    const ModelId& m = pool[i % pool.size()];
    if (store.has(q.id, m.pool_index)) return;
    try {
      sample_cell(q, m, kind, decoding, store, options);
      sampled[i] = 1;
    } catch (const std::exception& e) {
      std::lock_guard lock(failure_mutex);
      result.failures.push_back(failure_for(q, m, e));
    }
  });
  for (int s : sampled) result.sampled += s;
  std::sort(result.failures.begin(), result.failures.end(),
            [](const CellFailure& a, const CellFailure& b) {
              return std::tie(a.query_id, a.model) < std::tie(b.query_id, b.model);
            });
  return result;
}

}  // namespace divcov::harness
